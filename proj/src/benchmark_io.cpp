#include "paraeval/benchmark_io.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "paraeval/error.hpp"

namespace paraeval {

using nlohmann::json;

namespace {

constexpr std::string_view kTsvHeader = "input\treference\tcandidate\tscore";

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

double parse_score_field(const std::string& field, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "score '" + field + "' is not a number", line_no);
  }
  if (used != field.size()) throw Error(ErrorCode::ParseError, "trailing characters in score '" + field + "'", line_no);
  return v;
}

EvalInstance parse_json_record(const std::string& line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what(), line_no);
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "record is not an object", line_no);
  for (const auto& [key, value] : j.items()) {
    if (key != "input" && key != "reference" && key != "candidate" && key != "score") {
      throw Error(ErrorCode::ParseError, "unexpected field '" + key + "'", line_no);
    }
  }
  EvalInstance inst;
  auto need_string = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j[key].is_string()) {
      throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must be a string", line_no);
    }
    return j[key].get<std::string>();
  };
  inst.input = need_string("input");
  inst.candidate = need_string("candidate");
  if (j.contains("reference") && !j["reference"].is_null()) {
    if (!j["reference"].is_string()) throw Error(ErrorCode::ParseError, "field 'reference' must be a string or null", line_no);
    inst.reference = j["reference"].get<std::string>();
  }
  if (!j.contains("score") || !j["score"].is_number()) {
    throw Error(ErrorCode::ParseError, "field 'score' must be a number", line_no);
  }
  inst.human_score = j["score"].get<double>();
  return inst;
}

EvalInstance parse_tsv_record(const std::string& line, std::size_t line_no) {
  const auto fields = split_tabs(line);
  if (fields.size() != 4) {
    throw Error(ErrorCode::ParseError, "expected 4 tab-separated fields, got " + std::to_string(fields.size()), line_no);
  }
  EvalInstance inst;
  inst.input = fields[0];
  if (!fields[1].empty()) inst.reference = fields[1];
  inst.candidate = fields[2];
  inst.human_score = parse_score_field(fields[3], line_no);
  return inst;
}

void validate_record(const EvalInstance& inst, const TokenizerConfig& tokenizer, std::size_t line_no) {
  if (!std::isfinite(inst.human_score) || inst.human_score < 0.0 || inst.human_score > 1.0) {
    std::ostringstream msg;
    msg << "human score " << inst.human_score << " outside [0,1]";
    throw Error(ErrorCode::ScoreOutOfRange, msg.str(), line_no);
  }
  if (tokenize(inst.input, tokenizer).empty()) throw Error(ErrorCode::ParseError, "input has no tokens", line_no);
  if (tokenize(inst.candidate, tokenizer).empty()) throw Error(ErrorCode::ParseError, "candidate has no tokens", line_no);
  if (inst.reference && tokenize(*inst.reference, tokenizer).empty()) {
    throw Error(ErrorCode::ParseError, "reference has no tokens", line_no);
  }
}

}  // namespace

Benchmark parse_benchmark(const std::string& text, const TokenizerConfig& tokenizer, const std::string& language_tag,
                          const std::string& name) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  enum class Format { Unknown, Json, Tsv } format = Format::Unknown;
  std::vector<EvalInstance> instances;
  std::set<std::pair<std::string, std::string>> seen;
  std::map<std::string, std::pair<std::optional<std::string>, std::size_t>> reference_of;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (format == Format::Unknown) {
      if (line == kTsvHeader) {
        format = Format::Tsv;
        continue;
      }
      if (line.front() != '{') {
        throw Error(ErrorCode::ParseError, "expected a JSON object per line or the TSV header", line_no);
      }
      format = Format::Json;
    }
    EvalInstance inst = format == Format::Json ? parse_json_record(line, line_no) : parse_tsv_record(line, line_no);
    validate_record(inst, tokenizer, line_no);
    if (!seen.emplace(inst.input, inst.candidate).second) {
      throw Error(ErrorCode::DuplicateRecord, "input/candidate pair repeated", line_no);
    }
    auto [it, inserted] = reference_of.try_emplace(inst.input, inst.reference, line_no);
    if (!inserted && it->second.first != inst.reference) {
      throw Error(ErrorCode::InconsistentGroup,
                  "reference differs from the one given at line " + std::to_string(it->second.second), line_no);
    }
    instances.push_back(std::move(inst));
  }
  return Benchmark::build(name, language_tag, tokenizer, std::move(instances));
}

Benchmark load_benchmark(const std::string& path, const TokenizerConfig& tokenizer, const std::string& language_tag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open benchmark '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_benchmark(buffer.str(), tokenizer, language_tag, std::filesystem::path(path).stem().string());
}

void write_benchmark(const Benchmark& benchmark, std::ostream& out) {
  for (const auto& inst : benchmark.instances()) {
    json j;
    j["input"] = inst.input;
    j["reference"] = inst.reference ? json(*inst.reference) : json(nullptr);
    j["candidate"] = inst.candidate;
    j["score"] = inst.human_score;
    out << j.dump() << '\n';
  }
}

void save_benchmark(const Benchmark& benchmark, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  write_benchmark(benchmark, out);
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

std::size_t rounded_share(double fraction, std::size_t count) {
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const double r = std::nearbyint(fraction * static_cast<double>(count));
  std::fesetround(saved);
  return static_cast<std::size_t>(std::max(0.0, r));
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    std::swap(perm[i - 1], perm[static_cast<std::size_t>(x % bound)]);
  }
  return perm;
}

void SplitConfig::validate() const {
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "dev fraction must lie strictly between 0 and 1");
  }
}

std::pair<Benchmark, Benchmark> split_dev_test(const Benchmark& benchmark, const SplitConfig& config) {
  config.validate();
  const std::size_t groups = benchmark.groups().size();
  if (groups < 10) {
    throw Error(ErrorCode::TooFewGroups, "dev/test split needs at least 10 input groups, got " + std::to_string(groups));
  }
  const std::size_t dev_count = std::clamp<std::size_t>(rounded_share(config.dev_fraction, groups), 1, groups - 1);
  const auto perm = seeded_permutation(groups, config.seed);
  std::vector<std::size_t> dev(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(dev_count));
  std::vector<std::size_t> test(perm.begin() + static_cast<std::ptrdiff_t>(dev_count), perm.end());
  std::sort(dev.begin(), dev.end());
  std::sort(test.begin(), test.end());
  return {benchmark.select_groups(dev), benchmark.select_groups(test)};
}

Benchmark extend_benchmark(const Benchmark& benchmark, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw Error(ErrorCode::InvalidArgument, "fraction must lie in [0,1]");
  const auto& groups = benchmark.groups();
  const std::size_t count = std::min(rounded_share(fraction, groups.size()), groups.size());
  const auto perm = seeded_permutation(groups.size(), seed);
  std::vector<std::size_t> chosen(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(chosen.begin(), chosen.end());

  auto instances = benchmark.instances();
  for (auto g : chosen) {
    const auto& source = benchmark.instance(groups[g].indices.front());
    instances.push_back(EvalInstance{source.input, source.reference, source.input, 0.0});
  }
  return Benchmark::build(benchmark.name(), benchmark.language_tag(), benchmark.tokenizer(), std::move(instances));
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  if (name == "jsonl" || name == "json-lines") return ReportFormat::JsonLines;
  throw Error(ErrorCode::InvalidArgument, "unknown report format '" + name + "'");
}

std::string format_fixed4(double x) {
  if (!std::isfinite(x)) return "nan";
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const double scaled = std::nearbyint(x * 10000.0);
  std::fesetround(saved);
  const bool negative = scaled < 0.0;
  const auto q = static_cast<long long>(std::abs(scaled));
  std::string frac = std::to_string(q % 10000);
  frac.insert(0, 4 - frac.size(), '0');
  return (negative ? "-" : "") + std::to_string(q / 10000) + "." + frac;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string markdown_field(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '|') out += '\\';
    out += ch == '\n' ? ' ' : ch;
  }
  return out;
}

std::string opt4(const std::optional<double>& v) { return v ? format_fixed4(*v) : std::string(); }

}  // namespace

void render_report(const ReportDocument& doc, std::ostream& out) {
  switch (doc.format) {
    case ReportFormat::Csv:
      out << "metric,segment,pearson,spearman,n,value\r\n";
      for (const auto& r : doc.rows) {
        out << csv_field(r.metric_id) << ',' << csv_field(r.segment) << ',' << opt4(r.pearson) << ','
            << opt4(r.spearman) << ',' << r.n << ',' << opt4(r.value) << "\r\n";
      }
      break;
    case ReportFormat::Markdown:
      out << "| metric | segment | pearson | spearman | n | value |\n";
      out << "|---|---|---:|---:|---:|---:|\n";
      for (const auto& r : doc.rows) {
        out << "| " << markdown_field(r.metric_id) << " | " << markdown_field(r.segment) << " | " << opt4(r.pearson)
            << " | " << opt4(r.spearman) << " | " << r.n << " | " << opt4(r.value) << " |\n";
      }
      break;
    case ReportFormat::JsonLines:
      for (const auto& r : doc.rows) {
        auto number = [](const std::optional<double>& v) {
          return v && std::isfinite(*v) ? format_fixed4(*v) : std::string("null");
        };
        out << "{\"metric\":" << json(r.metric_id).dump() << ",\"segment\":" << json(r.segment).dump()
            << ",\"pearson\":" << number(r.pearson) << ",\"spearman\":" << number(r.spearman) << ",\"n\":" << r.n
            << ",\"value\":" << number(r.value) << "}\n";
      }
      break;
  }
}

std::string render_report(const ReportDocument& doc) {
  std::ostringstream out;
  render_report(doc, out);
  return out.str();
}

void emit_report(const ReportDocument& doc, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write report '" + path + "'");
  render_report(doc, out);
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

}  // namespace paraeval
