#pragma once

#include <string>
#include <vector>

#include "urlbench/nn/model_io.hpp"
#include "urlbench/nn/train.hpp"

namespace urlbench::nn {

/// One featurized row: fixed-width token ids plus the numeric feature
/// vectors, the label and the first-seen timestamp.
struct FeaturizedRecord {
  std::vector<uint16_t> char_ids;  // length cfg.char_seq_len
  std::vector<uint32_t> word_ids;  // length cfg.word_seq_len
  std::vector<float> lex;
  std::vector<float> dns;
  Label label = Label::kBenign;
  Timestamp first_seen = 0;
};

struct FeaturizedFile {
  ArtifactMeta meta;
  std::vector<FeaturizedRecord> records;
};

void save_featurized(const FeaturizedFile& file, const std::string& path);
FeaturizedFile load_featurized(const std::string& path);

/// Rebuilds the tokenized view (word spans come from the char ids, matching
/// what tokenize() produced at featurize time).
TrainSample to_train_sample(const FeaturizedRecord& rec, const ArtifactMeta& meta);

}  // namespace urlbench::nn
