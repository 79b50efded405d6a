#pragma once

#include <optional>
#include <string>

#include "urlbench/labeling.hpp"
#include "urlbench/nn/model.hpp"
#include "urlbench/nn/train.hpp"
#include "urlbench/resolver.hpp"

namespace urlbench {

/// Merged run settings: defaults, then the config file, then CLI flags.
/// Unknown config keys are rejected.
struct RunConfig {
  // paths
  std::string dataset;
  std::string verdicts;
  std::string ip2asn;
  std::string tld_registry;
  std::string dns_cache;
  std::string model;
  std::string featurized;

  labeling::LabelingConfig labeling;
  nn::ModelConfig model_cfg;
  nn::TrainConfig train_cfg;
  dns::ResolverConfig resolver;

  Timestamp cutoff = labeling::default_cutoff();
  std::optional<Timestamp> collection_time;
  int window_months = 2;
  bool live_dns = false;

  /// Applies `key=value` lines ('#' comments allowed). Throws ConfigError on
  /// unknown keys or bad values.
  void apply_file(const std::string& path);
  void apply_line(const std::string& key, const std::string& value);
};

}  // namespace urlbench
