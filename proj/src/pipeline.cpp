#include "urlbench/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "urlbench/csv.hpp"
#include "urlbench/errors.hpp"

namespace urlbench::pipeline {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

CurateReport curate(const std::string& in_csv, const std::string& out_csv,
                    const TldRegistry& registry, const CurateOptions& options) {
  auto rows = csv::read_file(in_csv);
  if (rows.empty()) throw IoError("empty dataset file " + in_csv);
  if (csv::join_row(rows[0].fields) != "url,label,first_seen,ips,ttl")
    throw MalformedRowError(rows[0].line, "expected header 'url,label,first_seen,ips,ttl'");

  CurateReport report;
  report.input_rows = rows.size() - 1;

  std::vector<UrlRecord> records;
  std::vector<std::string> hosts;  // per record, for DNS fill
  records.reserve(report.input_rows);

  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != 5) {
      ++report.malformed_rows;
      continue;
    }
    // Steps 1-3: format validation, normalization, TLD validation. One parse
    // performs all three; the error kind picks the drop bucket.
    ParsedUrl parsed;
    try {
      parsed = parse_url(row.fields[0], registry);
    } catch (const UrlError& e) {
      switch (e.kind()) {
        case UrlErrorKind::kNoScheme: ++report.bad_scheme; break;
        case UrlErrorKind::kIpLiteralHost: ++report.ip_literal; break;
        case UrlErrorKind::kMalformedHost: ++report.malformed_host; break;
        case UrlErrorKind::kUnknownTld: ++report.unknown_tld; break;
      }
      continue;
    }
    UrlRecord rec;
    rec.url = parsed.canonical();

    auto label = parse_label(row.fields[1]);
    auto ts = parse_iso8601(row.fields[2]);
    if (!label || !ts) {
      ++report.malformed_rows;
      continue;
    }
    rec.label = *label;
    rec.first_seen = *ts;

    bool ok = true;
    const std::string& ips_field = row.fields[3];
    if (!ips_field.empty()) {
      size_t i = 0;
      while (i <= ips_field.size()) {
        size_t semi = ips_field.find(';', i);
        auto part = std::string_view(ips_field)
                        .substr(i, (semi == std::string::npos ? ips_field.size() : semi) - i);
        auto ip = parse_ipv4(part);
        if (!ip) {
          ok = false;
          break;
        }
        rec.ips.push_back(*ip);
        if (semi == std::string::npos) break;
        i = semi + 1;
      }
    }
    if (ok && !row.fields[4].empty()) {
      for (char c : row.fields[4])
        if (c < '0' || c > '9') ok = false;
      if (ok) rec.ttl = static_cast<uint32_t>(std::stoul(row.fields[4]));
    }
    if (!ok) {
      ++report.malformed_rows;
      continue;
    }
    hosts.push_back(parsed.host());
    records.push_back(std::move(rec));
  }

  // Step 4: DNS responsiveness. Missing answers come from the cache, then
  // optionally live resolution; whatever stays unresolved keeps the padded
  // default (ips=[], ttl=0).
  std::vector<size_t> missing;
  for (size_t i = 0; i < records.size(); ++i) {
    if (!records[i].ips.empty()) continue;
    if (options.cache) {
      if (auto hit = options.cache->lookup(hosts[i])) {
        records[i].ips = hit->ips;
        records[i].ttl = hit->ttl;
        if (!records[i].ips.empty()) continue;
      }
    }
    missing.push_back(i);
  }
  if (options.live_dns && !missing.empty()) {
    std::vector<std::string> domains;
    domains.reserve(missing.size());
    for (size_t i : missing) domains.push_back(hosts[i]);
    auto responses = dns::resolve_many(domains, options.resolver);
    for (size_t k = 0; k < missing.size(); ++k) {
      records[missing[k]].ips = responses[k].ips;
      records[missing[k]].ttl = responses[k].ttl;
      if (options.cache) options.cache->insert(domains[k], responses[k]);
    }
  }
  for (const auto& rec : records)
    if (rec.ips.empty()) ++report.dns_padded;

  // Step 5: duplicate resolution.
  size_t before = records.size();
  records = dedup_records(records);
  report.duplicates_removed = before - records.size();

  if (options.collection_time) {
    before = records.size();
    records = labeling::filter_reputation_window(records, *options.collection_time,
                                                 options.window_months);
    report.window_filtered = before - records.size();
  }

  report.output_rows = records.size();
  save_dataset(out_csv, records);
  return report;
}

LabelReport label(const std::string& verdicts_csv, const std::string& out_dataset_csv,
                  const std::string& out_metrics_csv, const labeling::LabelingConfig& cfg) {
  auto verdicts = labeling::load_verdicts(verdicts_csv);
  auto summaries = labeling::aggregate_verdicts(verdicts);
  auto calibration = labeling::build_calibration_set(summaries, cfg);
  auto metrics = labeling::vendor_metrics(summaries, calibration, cfg);
  auto hq = labeling::select_high_quality(metrics, cfg);
  auto metrics_map = labeling::make_metrics_map(metrics);

  LabelReport report;
  report.verdict_rows = verdicts.size();
  report.urls = summaries.size();
  report.calibration_size = calibration.size();
  report.vendors = metrics.size();
  report.high_quality_vendors = hq.size();

  std::vector<UrlRecord> out;
  out.reserve(summaries.size());
  for (const auto& s : summaries) {
    auto assigned = labeling::assign_label(s, hq, metrics_map, cfg);
    if (!assigned) {
      ++report.dropped;
      continue;
    }
    switch (*assigned) {
      case Label::kBenign: ++report.benign; break;
      case Label::kMalware: ++report.malware; break;
      case Label::kPhishing: ++report.phishing; break;
    }
    UrlRecord rec;
    rec.url = s.url;
    rec.label = *assigned;
    rec.first_seen = s.first_seen;
    out.push_back(std::move(rec));
  }
  save_dataset(out_dataset_csv, out);
  write_vendor_metrics_csv(out_metrics_csv, metrics);
  return report;
}

nn::FeaturizedFile featurize(const std::vector<UrlRecord>& records,
                             const TldRegistry& registry, const dns::IpMetadataIndex& index,
                             const nn::ModelConfig& cfg, Timestamp cutoff) {
  std::vector<UrlRecord> train_records;
  for (const auto& rec : records)
    if (rec.first_seen < cutoff) train_records.push_back(rec);
  if (train_records.empty())
    throw EmptyCorpusError("no records before the cutoff; vocabularies need a train split");

  nn::FeaturizedFile file;
  file.meta.cfg = cfg;
  file.meta.cutoff = cutoff;

  std::vector<std::string> train_urls;
  train_urls.reserve(train_records.size());
  for (const auto& rec : train_records) train_urls.push_back(rec.url);
  file.meta.word_vocab = nn::WordVocab::build(train_urls, cfg.word_vocab_size);
  file.meta.tld_vocab = lexical::TldVocab::build(train_records, registry, cfg.tld_vocab_k);
  file.meta.dns_vocab = dns::build_dns_vocab(train_records, index, cfg.dns_top_k);

  file.records.reserve(records.size());
  for (const auto& rec : records) {
    ParsedUrl parsed = parse_url(rec.url, registry);
    nn::TokenizedUrl tok =
        nn::tokenize(rec.url, file.meta.word_vocab, cfg.char_seq_len, cfg.word_seq_len);
    nn::FeaturizedRecord out;
    out.char_ids.assign(tok.char_ids.begin(), tok.char_ids.end());
    out.word_ids.assign(tok.word_ids.begin(), tok.word_ids.end());
    out.lex = lexical::extract_lexical(parsed, file.meta.tld_vocab, cfg.entropy_mode);
    dns::DnsResponse resp;
    resp.ips = rec.ips;
    resp.ttl = rec.ttl;
    out.dns = dns::extract_dns(resp, index, file.meta.dns_vocab);
    out.label = rec.label;
    out.first_seen = rec.first_seen;
    file.records.push_back(std::move(out));
  }
  return file;
}

TrainOutput train_model(const nn::FeaturizedFile& file, nn::ModelConfig cfg,
                        const nn::TrainConfig& tcfg) {
  const nn::ModelConfig& fc = file.meta.cfg;
  cfg.char_seq_len = fc.char_seq_len;
  cfg.word_seq_len = fc.word_seq_len;
  cfg.word_vocab_size = fc.word_vocab_size;
  cfg.tld_vocab_k = fc.tld_vocab_k;
  cfg.dns_top_k = fc.dns_top_k;
  cfg.entropy_mode = fc.entropy_mode;

  TrainOutput out;
  out.model.cfg = cfg;
  out.model.word_vocab = file.meta.word_vocab;
  out.model.tld_vocab = file.meta.tld_vocab;
  out.model.dns_vocab = file.meta.dns_vocab;
  nn::Rng rng(tcfg.seed);
  out.model.init(rng);

  std::vector<nn::TrainSample> samples;
  samples.reserve(file.records.size());
  for (const auto& rec : file.records)
    if (rec.first_seen < file.meta.cutoff)
      samples.push_back(nn::to_train_sample(rec, file.meta));
  if (samples.empty()) throw EmptyCorpusError("no training records before the cutoff");

  nn::fit_standardizer(out.model, samples);
  out.epochs = nn::train(out.model, samples, tcfg);
  return out;
}

std::vector<bench::ScoredSample> score_records(const nn::Model<float>& model,
                                               const nn::FeaturizedFile& file, Split split) {
  std::vector<bench::ScoredSample> out;
  out.reserve(file.records.size());
  for (const auto& rec : file.records) {
    bool is_test = rec.first_seen >= file.meta.cutoff;
    if (split == Split::kTrain && is_test) continue;
    if (split == Split::kTest && !is_test) continue;
    nn::TrainSample s = nn::to_train_sample(rec, file.meta);
    auto [mal_logit, type_logit] = nn::infer_logits(model, s.tok, s.lex, s.dns);
    (void)type_logit;
    bench::ScoredSample scored;
    scored.score = nn::sigmoid(mal_logit);
    scored.is_malicious = rec.label != Label::kBenign;
    scored.first_seen = rec.first_seen;
    out.push_back(scored);
  }
  return out;
}

EvalReport evaluate(const nn::Model<float>& model, const nn::FeaturizedFile& file, Split split) {
  auto scored = score_records(model, file, split);
  EvalReport report;
  report.n = scored.size();
  report.auc = bench::roc_auc(scored);
  report.recall_at_1pct = bench::recall_at_fpr(scored, 0.01);
  report.recall_at_01pct = bench::recall_at_fpr(scored, 0.001);
  return report;
}

nn::Prediction predict_url(const nn::Model<float>& model, const std::string& url,
                           const TldRegistry& registry, const dns::IpMetadataIndex& index,
                           const PredictOptions& options) {
  ParsedUrl parsed = parse_url(url, registry);
  std::string canon = parsed.canonical();
  nn::TokenizedUrl tok =
      nn::tokenize(canon, model.word_vocab, model.cfg.char_seq_len, model.cfg.word_seq_len);
  std::vector<float> lex =
      lexical::extract_lexical(parsed, model.tld_vocab, model.cfg.entropy_mode);

  dns::DnsResponse resp;
  std::string host = parsed.host();
  bool have = false;
  if (options.cache) {
    if (auto hit = options.cache->lookup(host)) {
      resp = *hit;
      have = true;
    }
  }
  if (!have && options.live_dns) resp = dns::resolve(host, options.resolver);
  std::vector<float> dnsv = dns::extract_dns(resp, index, model.dns_vocab);
  return nn::predict(model, tok, lex, dnsv);
}

void write_eval_csv(const std::string& path, const EvalReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "n,auc,recall_at_1pct,recall_at_01pct\n";
  out << report.n << "," << fmt(report.auc) << "," << fmt(report.recall_at_1pct) << ","
      << fmt(report.recall_at_01pct) << "\n";
}

void write_degradation_csv(const std::string& path, const std::vector<bench::MonthRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "month,n,auc,recall_at_1pct\n";
  for (const auto& row : rows) {
    out << row.month << "," << row.n << ",";
    if (row.auc) out << fmt(*row.auc);
    out << ",";
    if (row.recall_at_1pct) out << fmt(*row.recall_at_1pct);
    out << "\n";
  }
}

void write_vendor_metrics_csv(const std::string& path,
                              const std::vector<labeling::VendorMetrics>& metrics) {
  std::vector<labeling::VendorMetrics> sorted = metrics;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const labeling::VendorMetrics& a, const labeling::VendorMetrics& b) {
                     if (a.quality != b.quality) return a.quality > b.quality;
                     return a.vendor < b.vendor;
                   });
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "vendor,detection_rate,coverage,quality\n";
  for (const auto& m : sorted)
    out << csv::escape_field(m.vendor) << "," << fmt(m.detection_rate) << ","
        << fmt(m.coverage) << "," << fmt(m.quality) << "\n";
}

void write_latency_csv(const std::string& path, const bench::LatencyReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "url_index,latency_ms\n";
  for (size_t i = 0; i < report.per_url_ms.size(); ++i)
    out << i << "," << fmt(report.per_url_ms[i]) << "\n";
  out << "\n";
  out << "median_ms," << fmt(report.median_ms) << "\n";
  out << "mean_ms," << fmt(report.mean_ms) << "\n";
  out << "p99_ms," << fmt(report.p99_ms) << "\n";
  out << "sequential_50_total_ms," << fmt(report.sequential_50_total_ms) << "\n";
  out << "realtime," << (report.realtime ? "true" : "false") << "\n";
}

}  // namespace urlbench::pipeline
