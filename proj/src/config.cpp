#include "urlbench/config.hpp"

#include <fstream>

#include "urlbench/errors.hpp"

namespace urlbench {

namespace {

int64_t to_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    int64_t v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (...) {
    throw ConfigError("bad integer for " + key + ": '" + value + "'");
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (...) {
    throw ConfigError("bad number for " + key + ": '" + value + "'");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  throw ConfigError("bad boolean for " + key + ": '" + value + "'");
}

Timestamp to_time(const std::string& key, const std::string& value) {
  auto ts = parse_iso8601(value);
  if (!ts) throw ConfigError("bad timestamp for " + key + ": '" + value + "'");
  return *ts;
}

}  // namespace

void RunConfig::apply_line(const std::string& key, const std::string& value) {
  // paths
  if (key == "dataset") dataset = value;
  else if (key == "verdicts") verdicts = value;
  else if (key == "ip2asn") ip2asn = value;
  else if (key == "tld_registry") tld_registry = value;
  else if (key == "dns_cache") dns_cache = value;
  else if (key == "model") model = value;
  else if (key == "featurized") featurized = value;
  // labeling
  else if (key == "calibration_min_detections")
    labeling.calibration_min_detections = static_cast<int>(to_int(key, value));
  else if (key == "hq_detection_rate_min") labeling.hq_detection_rate_min = to_double(key, value);
  else if (key == "hq_coverage_min") labeling.hq_coverage_min = to_double(key, value);
  else if (key == "quality_threshold") labeling.quality_threshold = to_double(key, value);
  else if (key == "power_mean_exponent") labeling.power_mean_exponent = to_double(key, value);
  else if (key == "quality_scale") labeling.quality_scale = to_double(key, value);
  // tokenizer / features
  else if (key == "char_seq_len") model_cfg.char_seq_len = static_cast<int>(to_int(key, value));
  else if (key == "word_seq_len") model_cfg.word_seq_len = static_cast<int>(to_int(key, value));
  else if (key == "word_vocab_size")
    model_cfg.word_vocab_size = static_cast<int>(to_int(key, value));
  else if (key == "tld_vocab_k") model_cfg.tld_vocab_k = static_cast<int>(to_int(key, value));
  else if (key == "dns_top_k") model_cfg.dns_top_k = static_cast<int>(to_int(key, value));
  else if (key == "entropy_mode") {
    if (value == "distinct") model_cfg.entropy_mode = lexical::EntropyMode::kDistinctBase;
    else if (value == "base2") model_cfg.entropy_mode = lexical::EntropyMode::kBase2;
    else throw ConfigError("entropy_mode must be 'distinct' or 'base2'");
  }
  // model
  else if (key == "char_emb_dim") model_cfg.char_emb_dim = static_cast<int>(to_int(key, value));
  else if (key == "word_emb_dim") model_cfg.word_emb_dim = static_cast<int>(to_int(key, value));
  else if (key == "char_filters") model_cfg.char_filters = static_cast<int>(to_int(key, value));
  else if (key == "word_branch") {
    if (value == "attention") model_cfg.word_branch = nn::WordBranch::kAttention;
    else if (value == "conv") model_cfg.word_branch = nn::WordBranch::kConv;
    else throw ConfigError("word_branch must be 'attention' or 'conv'");
  } else if (key == "word_conv_filters")
    model_cfg.word_conv_filters = static_cast<int>(to_int(key, value));
  else if (key == "lex_hidden1") model_cfg.lex_hidden1 = static_cast<int>(to_int(key, value));
  else if (key == "lex_hidden2") model_cfg.lex_hidden2 = static_cast<int>(to_int(key, value));
  else if (key == "dns_hidden1") model_cfg.dns_hidden1 = static_cast<int>(to_int(key, value));
  else if (key == "dns_hidden2") model_cfg.dns_hidden2 = static_cast<int>(to_int(key, value));
  else if (key == "fusion_dim") model_cfg.fusion_dim = static_cast<int>(to_int(key, value));
  else if (key == "use_lexical") model_cfg.use_lexical = to_bool(key, value);
  else if (key == "use_dns") model_cfg.use_dns = to_bool(key, value);
  else if (key == "loss_mode") {
    if (value == "binary") model_cfg.loss_mode = nn::LossMode::kBinary;
    else if (value == "multiclass") model_cfg.loss_mode = nn::LossMode::kMulticlass;
    else throw ConfigError("loss_mode must be 'binary' or 'multiclass'");
  }
  // training
  else if (key == "optimizer") {
    if (value == "adam") train_cfg.optimizer = nn::Optimizer::kAdam;
    else if (value == "momentum") train_cfg.optimizer = nn::Optimizer::kMomentum;
    else throw ConfigError("optimizer must be 'adam' or 'momentum'");
  } else if (key == "learning_rate") train_cfg.learning_rate = to_double(key, value);
  else if (key == "momentum") train_cfg.momentum = to_double(key, value);
  else if (key == "batch_size") train_cfg.batch_size = static_cast<int>(to_int(key, value));
  else if (key == "epochs") train_cfg.epochs = static_cast<int>(to_int(key, value));
  else if (key == "lambda") train_cfg.lambda = to_double(key, value);
  else if (key == "threads") train_cfg.threads = static_cast<int>(to_int(key, value));
  else if (key == "shard_size") train_cfg.shard_size = static_cast<int>(to_int(key, value));
  else if (key == "seed") train_cfg.seed = static_cast<uint64_t>(to_int(key, value));
  // split / curation
  else if (key == "cutoff") cutoff = to_time(key, value);
  else if (key == "collection_time") collection_time = to_time(key, value);
  else if (key == "reputation_window_months")
    window_months = static_cast<int>(to_int(key, value));
  // dns
  else if (key == "resolver") resolver.server = value;
  else if (key == "resolver_port")
    resolver.port = static_cast<uint16_t>(to_int(key, value));
  else if (key == "dns_timeout_ms") resolver.timeout_ms = static_cast<int>(to_int(key, value));
  else if (key == "dns_retries") resolver.retries = static_cast<int>(to_int(key, value));
  else if (key == "dns_max_inflight")
    resolver.max_inflight = static_cast<int>(to_int(key, value));
  else if (key == "ttl_mode") {
    if (value == "min") resolver.ttl_mode = dns::TtlMode::kMin;
    else if (value == "max") resolver.ttl_mode = dns::TtlMode::kMax;
    else if (value == "first") resolver.ttl_mode = dns::TtlMode::kFirst;
    else throw ConfigError("ttl_mode must be 'min', 'max' or 'first'");
  } else if (key == "live_dns") live_dns = to_bool(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::apply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
      line.pop_back();
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    line = line.substr(start);
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    apply_line(line.substr(0, eq), line.substr(eq + 1));
  }
}

}  // namespace urlbench
