#pragma once

#include <string>

#include "urlbench/nn/model.hpp"

namespace urlbench::nn {

/// Shared config/vocab text block stored inside both the model file and the
/// featurized batch file. Tokens are percent-encoded so arbitrary words and
/// ISP names survive the key=value format.
struct ArtifactMeta {
  ModelConfig cfg;
  WordVocab word_vocab;
  lexical::TldVocab tld_vocab;
  dns::DnsVocab dns_vocab;
  Timestamp cutoff = 0;  // train/test boundary the vocabs were built under
};

std::string encode_token(const std::string& s);
std::string decode_token(const std::string& s);

std::string meta_to_text(const ArtifactMeta& meta);
ArtifactMeta meta_from_text(const std::string& text);

uint64_t fnv1a64(const uint8_t* data, size_t len);

/// Model file: "URLB", u16 version, config text block, named float32 tensors,
/// trailing 64-bit checksum of all preceding bytes.
void save_model(const Model<float>& model, const std::string& path);

/// Throws VersionMismatchError on a bad magic or version and
/// ChecksumMismatchError on truncation or corruption.
Model<float> load_model(const std::string& path);

}  // namespace urlbench::nn
