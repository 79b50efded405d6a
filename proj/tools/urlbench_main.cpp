#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "urlbench/config.hpp"
#include "urlbench/errors.hpp"
#include "urlbench/pipeline.hpp"

namespace {

using namespace urlbench;

std::string need(const std::string& value, const char* what) {
  if (value.empty())
    throw ConfigError(std::string("missing required path: ") + what);
  return value;
}

Timestamp parse_time_flag(const std::string& value, const char* what) {
  auto ts = parse_iso8601(value);
  if (!ts) throw ConfigError(std::string("bad timestamp for ") + what + ": '" + value + "'");
  return *ts;
}

dns::DnsCache load_cache_if_any(const std::string& path) {
  if (path.empty() || !std::filesystem::exists(path)) return dns::DnsCache{};
  return dns::DnsCache::load(path);
}

std::vector<std::string> load_url_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> urls;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty() && line[0] != '#') urls.push_back(line);
  }
  return urls;
}

int run(int argc, char** argv) {
  CLI::App app{"urlbench: curation, labeling, featurization, training and "
               "benchmarking for real-time malicious URL classification"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path, flag_cutoff, flag_dns_cache;
  std::optional<uint64_t> flag_seed;
  bool flag_live_dns = false;

  app.add_option("--config", config_path, "key=value config file");
  auto* opt_seed = app.add_option("--seed", flag_seed, "RNG seed");
  auto* opt_cutoff =
      app.add_option("--cutoff", flag_cutoff, "train/test boundary (ISO-8601 UTC)");
  auto* opt_cache = app.add_option("--dns-cache", flag_dns_cache, "offline DNS cache CSV");
  auto* opt_live = app.add_flag("--live-dns", flag_live_dns, "resolve cache misses over DNS");

  // curate
  auto* curate_cmd = app.add_subcommand("curate", "validate, normalize and deduplicate a raw CSV");
  std::string in_path, out_path, metrics_path, flag_registry, flag_collection;
  std::optional<int> flag_window;
  curate_cmd->add_option("--in", in_path, "raw dataset CSV")->required();
  curate_cmd->add_option("--out", out_path, "curated dataset CSV")->required();
  auto* c_reg = curate_cmd->add_option("--tld-registry", flag_registry, "TLD registry file");
  auto* c_coll = curate_cmd->add_option("--collection-time", flag_collection,
                                        "collection instant for the reputation window");
  curate_cmd->add_option("--window-months", flag_window, "reputation window length");

  // label
  auto* label_cmd = app.add_subcommand("label", "assign labels from vendor verdicts");
  std::string verdicts_path, label_out, metrics_out;
  std::optional<int> flag_min_det;
  std::optional<double> flag_dr_min, flag_cov_min, flag_qthresh, flag_qexp, flag_qscale;
  label_cmd->add_option("--verdicts", verdicts_path, "verdicts CSV")->required();
  label_cmd->add_option("--out", label_out, "labeled dataset CSV")->required();
  label_cmd->add_option("--metrics-out", metrics_out, "vendor metrics CSV")->required();
  label_cmd->add_option("--calibration-min-detections", flag_min_det);
  label_cmd->add_option("--hq-detection-rate-min", flag_dr_min);
  label_cmd->add_option("--hq-coverage-min", flag_cov_min);
  label_cmd->add_option("--quality-threshold", flag_qthresh);
  label_cmd->add_option("--power-mean-exponent", flag_qexp);
  label_cmd->add_option("--quality-scale", flag_qscale);

  // featurize
  auto* feat_cmd = app.add_subcommand("featurize", "extract token ids and feature vectors");
  std::string feat_dataset, feat_ip2asn, feat_registry, feat_out;
  feat_cmd->add_option("--dataset", feat_dataset, "curated dataset CSV")->required();
  feat_cmd->add_option("--out", feat_out, "featurized output file")->required();
  auto* f_ip2asn = feat_cmd->add_option("--ip2asn", feat_ip2asn, "ip2asn v4 TSV");
  auto* f_reg = feat_cmd->add_option("--tld-registry", feat_registry, "TLD registry file");

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model on a featurized file");
  std::string train_featurized, train_model_out, flag_optimizer, flag_loss_mode,
      flag_word_branch;
  std::optional<int> flag_epochs, flag_batch, flag_threads, flag_char_filters;
  std::optional<double> flag_lr, flag_lambda;
  bool flag_no_dns = false, flag_no_lexical = false;
  train_cmd->add_option("--featurized", train_featurized)->required();
  train_cmd->add_option("--model-out", train_model_out)->required();
  train_cmd->add_option("--epochs", flag_epochs);
  train_cmd->add_option("--batch-size", flag_batch);
  train_cmd->add_option("--threads", flag_threads);
  train_cmd->add_option("--learning-rate", flag_lr);
  train_cmd->add_option("--lambda", flag_lambda);
  train_cmd->add_option("--char-filters", flag_char_filters);
  train_cmd->add_option("--optimizer", flag_optimizer)
      ->check(CLI::IsMember({"adam", "momentum"}));
  train_cmd->add_option("--loss-mode", flag_loss_mode)
      ->check(CLI::IsMember({"binary", "multiclass"}));
  train_cmd->add_option("--word-branch", flag_word_branch)
      ->check(CLI::IsMember({"attention", "conv"}));
  train_cmd->add_flag("--no-dns", flag_no_dns, "drop the DNS feature branch");
  train_cmd->add_flag("--no-lexical", flag_no_lexical, "drop the lexical feature branch");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "AUC and recall at fixed FPR");
  std::string eval_model, eval_featurized, eval_out, eval_split = "test";
  eval_cmd->add_option("--model", eval_model)->required();
  eval_cmd->add_option("--featurized", eval_featurized)->required();
  eval_cmd->add_option("--out", eval_out, "metrics CSV");
  eval_cmd->add_option("--split", eval_split)->check(CLI::IsMember({"train", "test", "all"}));

  // degradation
  auto* degr_cmd = app.add_subcommand("degradation", "monthly test-set evaluation");
  std::string degr_model, degr_featurized, degr_out;
  degr_cmd->add_option("--model", degr_model)->required();
  degr_cmd->add_option("--featurized", degr_featurized)->required();
  degr_cmd->add_option("--out", degr_out, "report CSV");

  // bench-latency
  auto* bench_cmd = app.add_subcommand("bench-latency", "sequential per-URL latency");
  std::string bench_model, bench_urls, bench_dataset, bench_ip2asn, bench_registry, bench_out;
  std::optional<int> flag_warmup;
  bench_cmd->add_option("--model", bench_model)->required();
  bench_cmd->add_option("--urls", bench_urls, "newline-delimited URL list");
  bench_cmd->add_option("--dataset", bench_dataset, "take URLs from a dataset CSV");
  auto* b_ip2asn = bench_cmd->add_option("--ip2asn", bench_ip2asn);
  auto* b_reg = bench_cmd->add_option("--tld-registry", bench_registry);
  bench_cmd->add_option("--warmup", flag_warmup, "untimed warm-up URLs");
  bench_cmd->add_option("--out", bench_out, "per-URL timings CSV");

  // predict
  auto* pred_cmd = app.add_subcommand("predict", "classify one URL");
  std::string pred_model, pred_url, pred_ip2asn, pred_registry;
  pred_cmd->add_option("--model", pred_model)->required();
  pred_cmd->add_option("--url", pred_url)->required();
  auto* p_ip2asn = pred_cmd->add_option("--ip2asn", pred_ip2asn);
  auto* p_reg = pred_cmd->add_option("--tld-registry", pred_registry);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  if (!config_path.empty()) cfg.apply_file(config_path);
  if (opt_seed->count()) cfg.train_cfg.seed = *flag_seed;
  if (opt_cutoff->count()) cfg.cutoff = parse_time_flag(flag_cutoff, "--cutoff");
  if (opt_cache->count()) cfg.dns_cache = flag_dns_cache;
  if (opt_live->count()) cfg.live_dns = flag_live_dns;

  if (curate_cmd->parsed()) {
    if (c_reg->count()) cfg.tld_registry = flag_registry;
    if (c_coll->count()) cfg.collection_time = parse_time_flag(flag_collection, "--collection-time");
    if (flag_window) cfg.window_months = *flag_window;

    TldRegistry registry = TldRegistry::load(need(cfg.tld_registry, "tld_registry"));
    dns::DnsCache cache = load_cache_if_any(cfg.dns_cache);
    pipeline::CurateOptions options;
    options.collection_time = cfg.collection_time;
    options.window_months = cfg.window_months;
    options.cache = cfg.dns_cache.empty() ? nullptr : &cache;
    options.live_dns = cfg.live_dns;
    options.resolver = cfg.resolver;
    auto report = pipeline::curate(in_path, out_path, registry, options);
    if (cfg.live_dns && !cfg.dns_cache.empty()) cache.save(cfg.dns_cache);

    std::printf("input rows:          %zu\n", report.input_rows);
    std::printf("dropped malformed:   %zu\n", report.malformed_rows);
    std::printf("dropped bad scheme:  %zu\n", report.bad_scheme);
    std::printf("dropped ip literal:  %zu\n", report.ip_literal);
    std::printf("dropped bad host:    %zu\n", report.malformed_host);
    std::printf("dropped unknown tld: %zu\n", report.unknown_tld);
    std::printf("dns padded:          %zu\n", report.dns_padded);
    std::printf("duplicates removed:  %zu\n", report.duplicates_removed);
    std::printf("window filtered:     %zu\n", report.window_filtered);
    std::printf("output rows:         %zu\n", report.output_rows);
    return 0;
  }

  if (label_cmd->parsed()) {
    if (flag_min_det) cfg.labeling.calibration_min_detections = *flag_min_det;
    if (flag_dr_min) cfg.labeling.hq_detection_rate_min = *flag_dr_min;
    if (flag_cov_min) cfg.labeling.hq_coverage_min = *flag_cov_min;
    if (flag_qthresh) cfg.labeling.quality_threshold = *flag_qthresh;
    if (flag_qexp) cfg.labeling.power_mean_exponent = *flag_qexp;
    if (flag_qscale) cfg.labeling.quality_scale = *flag_qscale;

    auto report = pipeline::label(verdicts_path, label_out, metrics_out, cfg.labeling);
    std::printf("verdict rows:        %zu\n", report.verdict_rows);
    std::printf("distinct urls:       %zu\n", report.urls);
    std::printf("calibration size:    %zu\n", report.calibration_size);
    std::printf("vendors:             %zu\n", report.vendors);
    std::printf("high quality:        %zu\n", report.high_quality_vendors);
    std::printf("benign:              %zu\n", report.benign);
    std::printf("malware:             %zu\n", report.malware);
    std::printf("phishing:            %zu\n", report.phishing);
    std::printf("dropped (ambiguous): %zu\n", report.dropped);
    return 0;
  }

  if (feat_cmd->parsed()) {
    if (f_ip2asn->count()) cfg.ip2asn = feat_ip2asn;
    if (f_reg->count()) cfg.tld_registry = feat_registry;
    TldRegistry registry = TldRegistry::load(need(cfg.tld_registry, "tld_registry"));
    auto index = dns::IpMetadataIndex::load(need(cfg.ip2asn, "ip2asn"));
    auto loaded = load_dataset(feat_dataset, registry, /*strict=*/false);
    for (const auto& skip : loaded.skipped)
      std::fprintf(stderr, "skipping line %zu: %s\n", skip.line, skip.reason.c_str());
    auto file = pipeline::featurize(loaded.records, registry, index, cfg.model_cfg, cfg.cutoff);
    nn::save_featurized(file, feat_out);
    size_t train_n = 0;
    for (const auto& r : file.records)
      if (r.first_seen < cfg.cutoff) ++train_n;
    std::printf("records:   %zu (train %zu, test %zu)\n", file.records.size(), train_n,
                file.records.size() - train_n);
    std::printf("word vocab %d, tld vocab %d, dns dims %d\n", file.meta.word_vocab.size(),
                file.meta.tld_vocab.size(), file.meta.dns_vocab.dim());
    return 0;
  }

  if (train_cmd->parsed()) {
    if (flag_epochs) cfg.train_cfg.epochs = *flag_epochs;
    if (flag_batch) cfg.train_cfg.batch_size = *flag_batch;
    if (flag_threads) cfg.train_cfg.threads = *flag_threads;
    if (flag_lr) cfg.train_cfg.learning_rate = *flag_lr;
    if (flag_lambda) cfg.train_cfg.lambda = *flag_lambda;
    if (flag_char_filters) cfg.model_cfg.char_filters = *flag_char_filters;
    if (!flag_optimizer.empty())
      cfg.train_cfg.optimizer =
          flag_optimizer == "adam" ? nn::Optimizer::kAdam : nn::Optimizer::kMomentum;
    if (!flag_loss_mode.empty())
      cfg.model_cfg.loss_mode =
          flag_loss_mode == "binary" ? nn::LossMode::kBinary : nn::LossMode::kMulticlass;
    if (!flag_word_branch.empty())
      cfg.model_cfg.word_branch =
          flag_word_branch == "conv" ? nn::WordBranch::kConv : nn::WordBranch::kAttention;
    if (flag_no_dns) cfg.model_cfg.use_dns = false;
    if (flag_no_lexical) cfg.model_cfg.use_lexical = false;

    auto file = nn::load_featurized(train_featurized);
    auto out = pipeline::train_model(file, cfg.model_cfg, cfg.train_cfg);
    for (const auto& e : out.epochs)
      std::printf("epoch %d: loss %.6f\n", e.epoch, e.mean_loss);
    nn::save_model(out.model, train_model_out);
    std::printf("model written to %s\n", train_model_out.c_str());
    return 0;
  }

  if (eval_cmd->parsed()) {
    auto model = nn::load_model(eval_model);
    auto file = nn::load_featurized(eval_featurized);
    pipeline::Split split = eval_split == "train"  ? pipeline::Split::kTrain
                            : eval_split == "all" ? pipeline::Split::kAll
                                                  : pipeline::Split::kTest;
    auto report = pipeline::evaluate(model, file, split);
    std::printf("n=%zu auc=%.6f recall@1%%=%.6f recall@0.1%%=%.6f\n", report.n, report.auc,
                report.recall_at_1pct, report.recall_at_01pct);
    if (!eval_out.empty()) pipeline::write_eval_csv(eval_out, report);
    return 0;
  }

  if (degr_cmd->parsed()) {
    auto model = nn::load_model(degr_model);
    auto file = nn::load_featurized(degr_featurized);
    auto scored = pipeline::score_records(model, file, pipeline::Split::kTest);
    auto rows = bench::monthly_degradation(scored);
    for (const auto& row : rows) {
      if (row.auc)
        std::printf("%s n=%zu auc=%.6f recall@1%%=%.6f\n", row.month.c_str(), row.n, *row.auc,
                    *row.recall_at_1pct);
      else
        std::printf("%s n=%zu auc=n/a recall@1%%=n/a\n", row.month.c_str(), row.n);
    }
    if (!degr_out.empty()) pipeline::write_degradation_csv(degr_out, rows);
    return 0;
  }

  if (bench_cmd->parsed()) {
    if (b_ip2asn->count()) cfg.ip2asn = bench_ip2asn;
    if (b_reg->count()) cfg.tld_registry = bench_registry;
    auto model = nn::load_model(bench_model);
    TldRegistry registry = TldRegistry::load(need(cfg.tld_registry, "tld_registry"));
    auto index = dns::IpMetadataIndex::load(need(cfg.ip2asn, "ip2asn"));
    dns::DnsCache cache = load_cache_if_any(cfg.dns_cache);

    std::vector<std::string> urls;
    if (!bench_urls.empty()) {
      urls = load_url_list(bench_urls);
    } else if (!bench_dataset.empty()) {
      auto loaded = load_dataset(bench_dataset, registry, false);
      for (const auto& rec : loaded.records) urls.push_back(rec.url);
    } else {
      throw ConfigError("bench-latency needs --urls or --dataset");
    }
    auto report =
        bench::latency_bench(model, urls, registry, index, cache, flag_warmup.value_or(10));
    std::printf("urls=%zu median=%.3fms mean=%.3fms p99=%.3fms\n", report.per_url_ms.size(),
                report.median_ms, report.mean_ms, report.p99_ms);
    std::printf("sequential_50_total_ms=%.3f\n", report.sequential_50_total_ms);
    std::printf("realtime=%s\n", report.realtime ? "true" : "false");
    if (!bench_out.empty()) pipeline::write_latency_csv(bench_out, report);
    return 0;
  }

  if (pred_cmd->parsed()) {
    if (p_ip2asn->count()) cfg.ip2asn = pred_ip2asn;
    if (p_reg->count()) cfg.tld_registry = pred_registry;
    auto model = nn::load_model(pred_model);
    TldRegistry registry = TldRegistry::load(need(cfg.tld_registry, "tld_registry"));
    auto index = dns::IpMetadataIndex::load(need(cfg.ip2asn, "ip2asn"));
    dns::DnsCache cache = load_cache_if_any(cfg.dns_cache);
    pipeline::PredictOptions options;
    options.cache = cfg.dns_cache.empty() ? nullptr : &cache;
    options.live_dns = cfg.live_dns;
    options.resolver = cfg.resolver;
    auto p = pipeline::predict_url(model, pred_url, registry, index, options);
    std::printf("p_malicious=%.6f\n", p.p_malicious);
    std::printf("p_benign=%.6f\n", p.p_benign);
    std::printf("p_phishing=%.6f\n", p.p_phishing);
    std::printf("p_malware=%.6f\n", p.p_malware);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const urlbench::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const urlbench::DivergenceError& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
