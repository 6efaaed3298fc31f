#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "paraeval/core.hpp"

namespace paraeval {

/// Reads a benchmark from line-delimited JSON objects
/// ({"input", "reference", "candidate", "score"}, reference nullable) or from
/// TSV with the header "input\treference\tcandidate\tscore" (empty reference
/// means none). Errors carry the 1-based line number.
Benchmark load_benchmark(const std::string& path, const TokenizerConfig& tokenizer, const std::string& language_tag);

/// Same, from an in-memory document. `name` labels the result.
Benchmark parse_benchmark(const std::string& text, const TokenizerConfig& tokenizer, const std::string& language_tag,
                          const std::string& name = "benchmark");

/// Line-delimited JSON in load order; scores keep full round-trip precision.
void write_benchmark(const Benchmark& benchmark, std::ostream& out);
void save_benchmark(const Benchmark& benchmark, const std::string& path);

/// round-half-even(fraction * count).
std::size_t rounded_share(double fraction, std::size_t count);

/// Fisher-Yates permutation of 0..n-1 driven by mt19937_64; identical across
/// standard libraries for a given seed.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

struct SplitConfig {
  double dev_fraction = 0.10;
  std::uint64_t seed = 13;

  void validate() const;
};

/// Whole input groups go to either side. Dev receives
/// round(dev_fraction * groups) groups (at least 1, at most groups-1) chosen
/// by a seeded shuffle; both sides keep the original instance order. Throws
/// TooFewGroups below 10 groups.
std::pair<Benchmark, Benchmark> split_dev_test(const Benchmark& benchmark, const SplitConfig& config);

/// Appends, for round(fraction * groups) seeded-shuffled groups, a copy of the
/// input as a candidate with human score 0 and the group's reference.
Benchmark extend_benchmark(const Benchmark& benchmark, double fraction = 0.20, std::uint64_t seed = 13);

enum class ReportFormat { Csv, Markdown, JsonLines };

ReportFormat parse_report_format(const std::string& name);

struct ReportRow {
  std::string metric_id;
  std::string segment;
  std::optional<double> pearson;
  std::optional<double> spearman;
  std::size_t n = 0;
  std::optional<double> value;  // scalar results such as proportions or tuned omega
};

struct ReportDocument {
  std::vector<ReportRow> rows;
  ReportFormat format = ReportFormat::Csv;
};

/// Fixed 4-decimal rendering with round-half-even on the decimal value.
std::string format_fixed4(double x);

void render_report(const ReportDocument& doc, std::ostream& out);
std::string render_report(const ReportDocument& doc);
/// Throws IoError when the file cannot be written.
void emit_report(const ReportDocument& doc, const std::string& path);

}  // namespace paraeval
