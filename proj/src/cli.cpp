#include "paraeval/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "paraeval/benchmark_io.hpp"
#include "paraeval/error.hpp"
#include "paraeval/meta_eval.hpp"
#include "paraeval/parallel.hpp"
#include "paraeval/parascore.hpp"
#include "paraeval/remote.hpp"
#include "paraeval/scoring.hpp"

#ifndef PARAEVAL_VERSION
#define PARAEVAL_VERSION "dev"
#endif

namespace paraeval::cli {

using nlohmann::json;

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path + "' for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "SHA-256 unavailable");
  }
  std::vector<char> buffer(1 << 16);
  while (in) {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &length);
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

namespace {

struct Options {
  // input
  std::string benchmark;
  std::string language = "en";
  std::string scheme = "auto";
  bool no_lowercase = false;
  // similarity backend
  std::string backend = "fallback";
  std::string sim_mode = "greedy-f1";
  std::string idf = "none";
  std::size_t remote_concurrency = 8;
  // metrics
  std::vector<std::string> metrics;
  double omega = 0.05;
  double gamma = 0.35;
  double alpha = 0.2;
  double beta = 4.0;
  std::string smoothing = "add-k:1";
  int max_n = 4;
  std::string ablation = "none";
  // run
  unsigned jobs = 0;
  std::string out;
  std::string manifest;
  std::string format = "csv";
  std::uint64_t seed = 13;
  // evaluate
  std::string correlations = "both";
  std::string on = "all";
  double dev_fraction = 0.10;
  // analyze
  std::string dist_key = "to-reference";
  std::string subset = "s-sim";
  std::optional<double> eta1;
  std::optional<double> eta2;
  double threshold = 0.35;
  std::string quantity = "delta-s";
  std::string surrogate_sim = "mean-pool-cosine";
  bool base = false;
  // tune
  std::string grid = "0:0.5:0.01";
  std::string objective = "pearson";
  std::string mode = "based";
  // extend
  double fraction = 0.20;
};

std::vector<std::string> split_list(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

BleuConfig parse_bleu(const Options& o) {
  BleuConfig c;
  c.max_n = o.max_n;
  if (o.smoothing == "none") {
    c.smoothing = Smoothing::None;
  } else if (o.smoothing == "add-k") {
    c.smoothing = Smoothing::AddK;
    c.k = 1.0;
  } else if (o.smoothing.starts_with("add-k:")) {
    c.smoothing = Smoothing::AddK;
    try {
      c.k = std::stod(o.smoothing.substr(6));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad smoothing constant in '" + o.smoothing + "'");
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "smoothing must be none, add-k or add-k:K");
  }
  c.validate();
  return c;
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      parts.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "grid must be START:STOP:STEP, got '" + spec + "'");
    }
  }
  if (parts.size() != 3) throw Error(ErrorCode::InvalidArgument, "grid must be START:STOP:STEP, got '" + spec + "'");
  return make_grid(parts[0], parts[1], parts[2]);
}

/// Everything a subcommand needs, resolved once from the flags.
class Session {
 public:
  Session(std::string command, Options options, std::ostream& out, std::ostream& err)
      : command_(std::move(command)), o_(std::move(options)), out_(out), err_(err) {
    jobs_ = o_.jobs == 0 ? default_jobs() : o_.jobs;
    format_ = parse_report_format(o_.format);
  }

  const Options& options() const { return o_; }
  unsigned jobs() const { return jobs_; }

  const Benchmark& benchmark() {
    if (!benchmark_) {
      TokenizerConfig tok;
      tok.scheme = o_.scheme == "auto" ? default_scheme_for_language(o_.language) : parse_token_scheme(o_.scheme);
      tok.lowercase = !o_.no_lowercase;
      benchmark_ = load_benchmark(o_.benchmark, tok, o_.language);
      inputs_["benchmark"] = {{"path", o_.benchmark}, {"sha256", sha256_file(o_.benchmark)}};
    }
    return *benchmark_;
  }

  SimilarityBackendDescriptor descriptor(const std::string& mode) const {
    auto d = SimilarityBackendDescriptor::parse(o_.backend);
    d.sentence_sim_mode = parse_sim_mode(mode);
    d.idf_enabled = o_.idf != "none";
    d.max_in_flight = o_.remote_concurrency;
    d.remote_timeout_ms = remote_timeout_from_env();
    d.validate();
    return d;
  }

  const SimilarityBackend& backend() {
    if (!backend_) backend_ = make_backend(o_.sim_mode);
    return *backend_;
  }

  /// A second view over the same provider with a different sentence-level mode.
  std::unique_ptr<SimilarityBackend> make_backend(const std::string& mode) {
    const auto d = descriptor(mode);
    if (!provider_) {
      provider_ = make_provider(d);
      if (d.provider == ProviderKind::EmbeddingFile) {
        inputs_["embeddings"] = {{"path", d.endpoint_or_path}, {"sha256", sha256_file(d.endpoint_or_path)}};
      }
    }
    auto b = std::make_unique<SimilarityBackend>(d, provider_);
    if (o_.idf != "none") {
      if (o_.idf != "references" && o_.idf != "inputs") {
        throw Error(ErrorCode::InvalidArgument, "idf must be none, references or inputs");
      }
      b->set_idf(build_idf(benchmark(), o_.idf == "references" ? IdfSource::References : IdfSource::Inputs));
    }
    return b;
  }

  MetricOptions metric_options() {
    MetricOptions m;
    m.bleu = parse_bleu(o_);
    m.alpha = o_.alpha;
    m.beta = o_.beta;
    m.parascore.omega = o_.omega;
    m.parascore.gamma = o_.gamma;
    if (o_.ablation == "no-threshold") {
      m.parascore.shape = DivergenceShape::Raw;
    } else if (o_.ablation == "no-ds") {
      m.parascore.omega = 0.0;
    } else if (o_.ablation != "none" && o_.ablation != "no-max") {
      throw Error(ErrorCode::InvalidArgument, "ablation must be none, no-threshold, no-max or no-ds");
    }
    m.parascore.validate();
    return m;
  }

  /// Applies the no-max ablation, which turns reference-based ParaScore into the free form.
  std::string resolve_metric(const std::string& id) const {
    if (!is_known_metric(id)) throw Error(ErrorCode::InvalidArgument, "unknown metric '" + id + "'");
    if (o_.ablation == "no-max" && id == "parascore") return "parascore-free";
    return id;
  }

  void warn_untuned_omega(bool omega_given, const std::vector<std::string>& metrics) {
    if (omega_given) return;
    for (const auto& m : metrics) {
      if (m.starts_with("parascore")) {
        err_ << "warning: omega defaults to 0.05, an untuned value; run `tune` to select it on a dev split\n";
        return;
      }
    }
  }

  ScoreVector score(const Benchmark& b, const std::string& metric) {
    return score_metric(b, resolve_metric(metric), metric_options(), backend(), jobs_);
  }

  void write_result(const std::string& text) {
    if (o_.out.empty()) {
      out_ << text;
      return;
    }
    std::ofstream file(o_.out, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(ErrorCode::IoError, "cannot write '" + o_.out + "'");
    file << text;
    if (!file) throw Error(ErrorCode::IoError, "write to '" + o_.out + "' failed");
  }

  void write_report(const std::vector<ReportRow>& rows) {
    ReportDocument doc;
    doc.rows = rows;
    doc.format = format_;
    write_result(render_report(doc));
  }

  void write_manifest(const json& config) {
    std::string path = o_.manifest;
    if (path.empty() && !o_.out.empty()) path = o_.out + ".manifest.json";
    if (path.empty()) return;
    json manifest;
    manifest["command"] = command_;
    manifest["config"] = config;
    manifest["inputs"] = inputs_;
    manifest["toolkit_version"] = PARAEVAL_VERSION;
    manifest["seed"] = o_.seed;
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(ErrorCode::IoError, "cannot write manifest '" + path + "'");
    file << manifest.dump(2) << '\n';
  }

  json base_config() const {
    json c;
    c["benchmark"] = o_.benchmark;
    c["language"] = o_.language;
    c["scheme"] = benchmark_ ? std::string(to_string(benchmark_->tokenizer().scheme)) : o_.scheme;
    c["lowercase"] = !o_.no_lowercase;
    c["backend"] = o_.backend;
    c["sim_mode"] = o_.sim_mode;
    c["idf"] = o_.idf;
    c["omega"] = o_.omega;
    c["gamma"] = o_.gamma;
    c["alpha"] = o_.alpha;
    c["beta"] = o_.beta;
    c["smoothing"] = o_.smoothing;
    c["max_n"] = o_.max_n;
    c["ablation"] = o_.ablation;
    c["format"] = o_.format;
    c["out"] = o_.out;
    return c;
  }

  std::ostream& err() { return err_; }

 private:
  std::string command_;
  Options o_;
  std::ostream& out_;
  std::ostream& err_;
  unsigned jobs_ = 1;
  ReportFormat format_ = ReportFormat::Csv;
  std::optional<Benchmark> benchmark_;
  std::shared_ptr<EmbeddingProvider> provider_;
  std::unique_ptr<SimilarityBackend> backend_;
  json inputs_ = json::object();
};

std::string fixed10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", v);
  return buf;
}

ReportRow correlation_row(const CorrelationReport& r, const std::string& segment, const std::string& which) {
  ReportRow row;
  row.metric_id = r.metric_id;
  row.segment = segment;
  row.n = r.n;
  if (which != "spearman") row.pearson = r.pearson;
  if (which != "pearson") row.spearman = r.spearman;
  return row;
}

/// Correlation over a subset; degenerate subsets become an empty row with a warning.
ReportRow subset_row(Session& s, const std::string& metric, const std::string& segment, const ScoreVector& scores,
                     const std::vector<double>& human, const std::vector<std::size_t>& indices) {
  try {
    return correlation_row(correlate_subset(metric, scores.values, human, indices), segment, "both");
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ConstantInput && e.code() != ErrorCode::TooFewInstances) throw;
    s.err() << "warning: " << metric << " on " << segment << ": " << e.what() << '\n';
    ReportRow row;
    row.metric_id = metric;
    row.segment = segment;
    row.n = indices.size();
    return row;
  }
}

void require_varied_human(const Benchmark& b) {
  const auto h = b.human_scores();
  if (h.size() >= 2 && std::all_of(h.begin(), h.end(), [&](double v) { return v == h.front(); })) {
    throw Error(ErrorCode::ConstantInput, "human scores are constant; correlations are undefined");
  }
}

std::vector<std::string> default_metrics(const Benchmark& b) {
  std::vector<std::string> free_only = {"bleu4-free",     "rouge1-free", "rouge2-free",   "rougeL-free",
                                        "bertscore-free", "bert-ibleu",  "parascore-free"};
  if (!b.all_have_reference()) return free_only;
  return {"bleu4",     "bleu4-free",     "rouge1",     "rouge1-free", "rouge2",         "rouge2-free",
          "rougeL",    "rougeL-free",    "bertscore",  "bertscore-free", "ibleu",       "bert-ibleu",
          "parascore", "parascore-free"};
}

int cmd_score(Session& s, bool omega_given) {
  const auto& o = s.options();
  const auto metrics = split_list(o.metrics);
  if (metrics.size() != 1) throw Error(ErrorCode::InvalidArgument, "score takes exactly one --metric");
  s.warn_untuned_omega(omega_given, metrics);
  const auto& b = s.benchmark();
  const auto scores = s.score(b, metrics.front());
  std::string text = "index," + metrics.front() + ",human\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    text += std::to_string(i) + "," + fixed10(scores[i]) + "," + fixed10(b.instance(i).human_score) + "\n";
  }
  s.write_result(text);
  auto config = s.base_config();
  config["metric"] = metrics.front();
  s.write_manifest(config);
  return kOk;
}

int cmd_evaluate(Session& s, bool omega_given) {
  const auto& o = s.options();
  if (o.correlations != "pearson" && o.correlations != "spearman" && o.correlations != "both") {
    throw Error(ErrorCode::InvalidArgument, "correlations must be pearson, spearman or both");
  }
  const Benchmark* target = &s.benchmark();
  std::optional<Benchmark> part;
  if (o.on == "dev" || o.on == "test") {
    auto [dev, test] = split_dev_test(s.benchmark(), SplitConfig{o.dev_fraction, o.seed});
    part = o.on == "dev" ? std::move(dev) : std::move(test);
    target = &*part;
  } else if (o.on != "all") {
    throw Error(ErrorCode::InvalidArgument, "--on must be all, dev or test");
  }
  auto metrics = split_list(o.metrics);
  if (metrics.empty()) metrics = default_metrics(*target);
  s.warn_untuned_omega(omega_given, metrics);
  require_varied_human(*target);
  const auto human = target->human_scores();

  std::vector<ReportRow> rows;
  for (const auto& m : metrics) {
    const auto scores = s.score(*target, m);
    rows.push_back(correlation_row(correlate(m, scores.values, human), o.on, o.correlations));
  }
  s.write_report(rows);
  auto config = s.base_config();
  config["metrics"] = metrics;
  config["correlations"] = o.correlations;
  config["on"] = o.on;
  config["dev_fraction"] = o.dev_fraction;
  s.write_manifest(config);
  return kOk;
}

int cmd_distance_groups(Session& s) {
  const auto& o = s.options();
  DistKey key;
  if (o.dist_key == "to-reference") {
    key = DistKey::ToReference;
  } else if (o.dist_key == "to-input") {
    key = DistKey::ToInput;
  } else {
    throw Error(ErrorCode::InvalidArgument, "--dist-key must be to-reference or to-input");
  }
  const auto& b = s.benchmark();
  require_varied_human(b);
  auto metrics = split_list(o.metrics);
  if (metrics.empty()) {
    metrics = key == DistKey::ToReference
                  ? std::vector<std::string>{"rougeL", "rouge1", "rouge2", "bertscore"}
                  : std::vector<std::string>{"rougeL-free", "rouge1-free", "rouge2-free", "bertscore-free"};
  }
  const auto dist = distance_scores(b, key, s.jobs());
  const auto groups = quartile_groups(b, dist, key);
  const auto human = b.human_scores();

  std::vector<ReportRow> rows;
  for (const auto& m : metrics) {
    const auto scores = s.score(b, m);
    for (const auto& g : groups) {
      auto row = subset_row(s, m, "group" + std::to_string(g.group_index), scores, human, g.instance_indices);
      double mean = 0.0;
      for (auto i : g.instance_indices) mean += dist[i];
      row.value = mean / static_cast<double>(g.instance_indices.size());
      rows.push_back(std::move(row));
    }
  }
  s.write_report(rows);
  auto config = s.base_config();
  config["analysis"] = "distance-groups";
  config["dist_key"] = o.dist_key;
  config["metrics"] = metrics;
  s.write_manifest(config);
  return kOk;
}

int cmd_cases(Session& s) {
  const auto& o = s.options();
  const auto& b = s.benchmark();
  require_varied_human(b);
  auto families = split_list(o.metrics);
  if (families.empty()) families = {"rougeL", "rouge1", "rouge2", "bertscore"};
  const auto partition =
      case_partition(b, distance_scores(b, DistKey::ToReference, s.jobs()), distance_scores(b, DistKey::ToInput, s.jobs()));
  const auto human = b.human_scores();
  const std::vector<std::pair<std::string, const std::vector<std::size_t>*>> segments = {
      {"case1", &partition.case1_indices}, {"case2", &partition.case2_indices}};

  std::vector<ReportRow> rows;
  std::map<std::string, std::vector<CorrelationReport>> based_by_segment, free_by_segment;
  for (const auto& family : families) {
    const auto free_id = free_counterpart(family);
    if (!free_id) throw Error(ErrorCode::InvalidArgument, "'" + family + "' has no reference-free counterpart");
    const auto based_scores = s.score(b, family);
    const auto free_scores = s.score(b, *free_id);
    for (const auto& [segment, indices] : segments) {
      auto based_row = subset_row(s, family, segment, based_scores, human, *indices);
      auto free_row = subset_row(s, *free_id, segment, free_scores, human, *indices);
      if (based_row.pearson && free_row.pearson) {
        based_by_segment[segment].push_back({family, *based_row.pearson, *based_row.spearman, based_row.n});
        free_by_segment[segment].push_back({*free_id, *free_row.pearson, *free_row.spearman, free_row.n});
      }
      rows.push_back(std::move(based_row));
      rows.push_back(std::move(free_row));
    }
  }
  for (const auto& [segment, indices] : segments) {
    ReportRow delta;
    delta.metric_id = "delta-free-vs-based";
    delta.segment = segment;
    delta.n = indices->size();
    if (!free_by_segment[segment].empty()) {
      delta.pearson = delta_free_vs_based(free_by_segment[segment], based_by_segment[segment], CorrelationField::Pearson);
      delta.spearman =
          delta_free_vs_based(free_by_segment[segment], based_by_segment[segment], CorrelationField::Spearman);
    }
    rows.push_back(std::move(delta));
  }
  rows.push_back(ReportRow{"proportion", "case1", std::nullopt, std::nullopt, partition.case1_indices.size(),
                           partition.proportions.first});
  rows.push_back(ReportRow{"proportion", "case2", std::nullopt, std::nullopt, partition.case2_indices.size(),
                           partition.proportions.second});
  s.write_report(rows);
  auto config = s.base_config();
  config["analysis"] = "cases";
  config["metrics"] = families;
  s.write_manifest(config);
  return kOk;
}

int cmd_attribution(Session& s) {
  const auto& o = s.options();
  const bool sim_subset = o.subset == "s-sim";
  if (!sim_subset && o.subset != "s-div") throw Error(ErrorCode::InvalidArgument, "--subset must be s-sim or s-div");
  DeltaQuantity quantity;
  if (o.quantity == "delta-s") {
    quantity = DeltaQuantity::DeltaS;
  } else if (o.quantity == "delta-d") {
    quantity = DeltaQuantity::DeltaD;
  } else if (o.quantity == "delta-m") {
    quantity = DeltaQuantity::DeltaM;
  } else {
    throw Error(ErrorCode::InvalidArgument, "--quantity must be delta-s, delta-d or delta-m");
  }
  const double eta1 = o.eta1.value_or(0.05);
  const double eta2 = o.eta2.value_or(sim_subset ? 0.15 : 0.10);

  const auto& b = s.benchmark();
  require_varied_human(b);
  const auto surrogate = s.make_backend(o.surrogate_sim);
  const auto dist = distance_scores(b, DistKey::ToInput, s.jobs());
  const auto sim = similarity_scores(b, *surrogate, s.jobs());

  std::vector<std::pair<std::string, std::vector<AttributionPair>>> subsets;
  if (sim_subset) {
    subsets.emplace_back(o.base ? "base" : "s-sim", build_s_sim(b, dist, sim, eta1, eta2, o.base, s.jobs()));
  } else {
    auto all = build_s_div(b, dist, sim, eta1, eta2, s.jobs());
    auto [div1, div2] = split_s_div(all, o.threshold);
    subsets.emplace_back("s-div", std::move(all));
    subsets.emplace_back("s-div1", std::move(div1));
    subsets.emplace_back("s-div2", std::move(div2));
  }

  std::vector<ScoreVector> metric_scores;
  if (quantity == DeltaQuantity::DeltaM) {
    auto metrics = split_list(o.metrics);
    if (metrics.empty()) throw Error(ErrorCode::InvalidArgument, "delta-m needs --metric");
    for (const auto& m : metrics) metric_scores.push_back(s.score(b, m));
  }

  std::vector<ReportRow> rows;
  auto emit = [&](const std::string& segment, const std::vector<AttributionPair>& pairs, const ScoreVector* metric) {
    ReportRow row;
    row.segment = segment;
    row.n = pairs.size();
    try {
      const auto report = pair_delta_correlation(pairs, quantity, metric);
      row = correlation_row(report, segment, "both");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TooFewPairs && e.code() != ErrorCode::ConstantInput) throw;
      s.err() << "warning: " << segment << ": " << e.what() << '\n';
      row.metric_id = metric ? "delta_m:" + metric->metric_id : (quantity == DeltaQuantity::DeltaS ? "delta_s" : "delta_d");
    }
    rows.push_back(std::move(row));
  };
  for (const auto& [segment, pairs] : subsets) {
    if (metric_scores.empty()) {
      emit(segment, pairs, nullptr);
    } else {
      for (const auto& m : metric_scores) emit(segment, pairs, &m);
    }
  }
  s.write_report(rows);
  auto config = s.base_config();
  config["analysis"] = "attribution";
  config["subset"] = o.subset;
  config["eta1"] = eta1;
  config["eta2"] = eta2;
  config["threshold"] = o.threshold;
  config["quantity"] = o.quantity;
  config["surrogate_sim"] = o.surrogate_sim;
  config["base"] = o.base;
  config["metrics"] = split_list(o.metrics);
  s.write_manifest(config);
  return kOk;
}

int cmd_tune(Session& s) {
  const auto& o = s.options();
  ParaScoreMode mode;
  if (o.mode == "free") {
    mode = ParaScoreMode::Free;
  } else if (o.mode == "based") {
    mode = ParaScoreMode::Based;
  } else {
    throw Error(ErrorCode::InvalidArgument, "--mode must be free or based");
  }
  CorrelationKind objective;
  if (o.objective == "pearson") {
    objective = CorrelationKind::Pearson;
  } else if (o.objective == "spearman") {
    objective = CorrelationKind::Spearman;
  } else {
    throw Error(ErrorCode::InvalidArgument, "--objective must be pearson or spearman");
  }
  const auto grid = parse_grid(o.grid);
  auto [dev, test] = split_dev_test(s.benchmark(), SplitConfig{o.dev_fraction, o.seed});
  auto options = s.metric_options();
  const auto tuned = tune_omega(dev, options.parascore, grid, objective, mode, s.backend(), s.jobs());

  options.parascore.omega = tuned.omega;
  const std::string metric = mode == ParaScoreMode::Free ? "parascore-free" : "parascore";
  const std::string baseline = mode == ParaScoreMode::Free ? "bertscore-free" : "bertscore";
  std::vector<ReportRow> rows;
  for (const auto* part : {&dev, &test}) {
    const std::string segment = part == &dev ? "dev" : "test";
    const auto human = part->human_scores();
    auto row = correlation_row(
        correlate(metric, score_metric(*part, metric, options, s.backend(), s.jobs()).values, human), segment, "both");
    row.value = tuned.omega;
    rows.push_back(std::move(row));
    rows.push_back(correlation_row(
        correlate(baseline, score_metric(*part, baseline, options, s.backend(), s.jobs()).values, human), segment,
        "both"));
  }
  s.err() << "tuned omega " << tuned.omega << " (" << o.objective << " on dev " << tuned.objective << ")\n";
  s.write_report(rows);
  auto config = s.base_config();
  config["grid"] = grid;
  config["objective"] = o.objective;
  config["mode"] = o.mode;
  config["dev_fraction"] = o.dev_fraction;
  config["tuned_omega"] = tuned.omega;
  s.write_manifest(config);
  return kOk;
}

int cmd_extend(Session& s) {
  const auto& o = s.options();
  if (o.out.empty()) throw Error(ErrorCode::InvalidArgument, "extend needs --out");
  const auto extended = extend_benchmark(s.benchmark(), o.fraction, o.seed);
  std::ostringstream text;
  write_benchmark(extended, text);
  s.write_result(text.str());
  auto config = s.base_config();
  config["fraction"] = o.fraction;
  config["added"] = extended.size() - s.benchmark().size();
  s.write_manifest(config);
  return kOk;
}

void add_common(CLI::App* app, Options& o) {
  app->add_option("--benchmark", o.benchmark, "Benchmark file (JSONL or TSV)")->required();
  app->add_option("--language", o.language, "Language tag; picks the default tokenization")->capture_default_str();
  app->add_option("--scheme", o.scheme, "auto, whitespace or character")->capture_default_str();
  app->add_flag("--no-lowercase", o.no_lowercase, "Keep case under whitespace tokenization");
  app->add_option("--backend", o.backend, "fallback, file:PATH or remote:URL")->capture_default_str();
  app->add_option("--sim-mode", o.sim_mode, "greedy-f1 or mean-pool-cosine")->capture_default_str();
  app->add_option("--idf", o.idf, "none, references or inputs")->capture_default_str();
  app->add_option("--remote-concurrency", o.remote_concurrency, "Max in-flight remote requests")->capture_default_str();
  app->add_option("--metric", o.metrics, "Metric id(s), comma separated");
  app->add_option("--omega", o.omega, "ParaScore divergence weight")->capture_default_str();
  app->add_option("--gamma", o.gamma, "ParaScore divergence threshold")->capture_default_str();
  app->add_option("--alpha", o.alpha, "iBLEU self-overlap penalty")->capture_default_str();
  app->add_option("--beta", o.beta, "BERT-iBLEU weight")->capture_default_str();
  app->add_option("--smoothing", o.smoothing, "none, add-k or add-k:K")->capture_default_str();
  app->add_option("--max-n", o.max_n, "BLEU maximum n-gram order")->capture_default_str();
  app->add_option("--ablation", o.ablation, "none, no-threshold, no-max or no-ds")->capture_default_str();
  app->add_option("--jobs", o.jobs, "Worker threads (0 = all processors)");
  app->add_option("--out", o.out, "Result file (default: standard output)");
  app->add_option("--manifest", o.manifest, "Manifest path (default: <out>.manifest.json)");
  app->add_option("--format", o.format, "csv, markdown or jsonl")->capture_default_str();
  app->add_option("--seed", o.seed, "Seed for splits and sampling")->capture_default_str();
}

int exit_code_for(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::Usage: return kUsageError;
    case ErrorCategory::Data: return kDataError;
    case ErrorCategory::Provider: return kProviderError;
  }
  return kDataError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Paraphrase evaluation toolkit", "paraeval"};
  app.set_version_flag("--version", PARAEVAL_VERSION);
  app.require_subcommand(1);

  auto* score = app.add_subcommand("score", "Per-instance scores for one metric");
  add_common(score, o);

  auto* evaluate = app.add_subcommand("evaluate", "Correlation of metrics with human scores");
  add_common(evaluate, o);
  evaluate->add_option("--correlations", o.correlations, "pearson, spearman or both")->capture_default_str();
  evaluate->add_option("--on", o.on, "all, dev or test")->capture_default_str();
  evaluate->add_option("--dev-fraction", o.dev_fraction, "Dev share when --on is dev or test")->capture_default_str();

  auto* analyze = app.add_subcommand("analyze", "Distance and attribution analyses");
  analyze->require_subcommand(1);
  auto* groups = analyze->add_subcommand("distance-groups", "Correlations on four distance quartiles");
  add_common(groups, o);
  groups->add_option("--dist-key", o.dist_key, "to-reference or to-input")->capture_default_str();
  auto* cases = analyze->add_subcommand("cases", "Case I/II correlations and proportions");
  add_common(cases, o);
  auto* attribution = analyze->add_subcommand("attribution", "Delta correlations on attribution subsets");
  add_common(attribution, o);
  attribution->add_option("--subset", o.subset, "s-sim or s-div")->capture_default_str();
  attribution->add_option("--eta1", o.eta1, "Closeness bound (default 0.05)");
  attribution->add_option("--eta2", o.eta2, "Separation bound (default 0.15 for s-sim, 0.10 for s-div)");
  attribution->add_option("--threshold", o.threshold, "s-div split threshold")->capture_default_str();
  attribution->add_option("--quantity", o.quantity, "delta-s, delta-d or delta-m")->capture_default_str();
  attribution->add_option("--surrogate-sim", o.surrogate_sim, "Sentence similarity used to build the subsets")
      ->capture_default_str();
  attribution->add_flag("--base", o.base, "s-sim with the distance constraint only");

  auto* tune = app.add_subcommand("tune", "Select omega on a dev split");
  add_common(tune, o);
  tune->add_option("--grid", o.grid, "START:STOP:STEP")->capture_default_str();
  tune->add_option("--objective", o.objective, "pearson or spearman")->capture_default_str();
  tune->add_option("--dev-fraction", o.dev_fraction, "Share of input groups used for tuning")->capture_default_str();
  tune->add_option("--mode", o.mode, "free or based")->capture_default_str();

  auto* extend = app.add_subcommand("extend", "Add zero-score input copies as candidates");
  add_common(extend, o);
  extend->add_option("--fraction", o.fraction, "Share of input groups to copy")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << PARAEVAL_VERSION << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  try {
    const bool omega_given = [&] {
      for (auto* sub : {score, evaluate}) {
        if (sub->parsed() && sub->count("--omega") > 0) return true;
      }
      return false;
    }();
    if (score->parsed()) {
      Session s("score", o, out, err);
      return cmd_score(s, omega_given);
    }
    if (evaluate->parsed()) {
      Session s("evaluate", o, out, err);
      return cmd_evaluate(s, omega_given);
    }
    if (groups->parsed()) {
      Session s("analyze distance-groups", o, out, err);
      return cmd_distance_groups(s);
    }
    if (cases->parsed()) {
      Session s("analyze cases", o, out, err);
      return cmd_cases(s);
    }
    if (attribution->parsed()) {
      Session s("analyze attribution", o, out, err);
      return cmd_attribution(s);
    }
    if (tune->parsed()) {
      Session s("tune", o, out, err);
      return cmd_tune(s);
    }
    if (extend->parsed()) {
      Session s("extend", o, out, err);
      return cmd_extend(s);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  err << app.help();
  return kUsageError;
}

}  // namespace paraeval::cli
