// Acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero
// when any of them fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <tuple>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "paraeval/benchmark_io.hpp"
#include "paraeval/lexical.hpp"
#include "paraeval/meta_eval.hpp"
#include "paraeval/parallel.hpp"
#include "paraeval/parascore.hpp"
#include "paraeval/scoring.hpp"
#include "synthetic.hpp"

using namespace paraeval;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// --- edit distance -----------------------------------------------------------

Outcome edit_distance_oracle() {
  const auto start = Clock::now();
  std::vector<std::vector<std::string>> all = {{}};
  for (std::size_t len = 1; len <= 6; ++len) {
    const std::size_t before = all.size();
    for (std::size_t i = 0; i < before; ++i) {
      if (all[i].size() != len - 1) continue;
      for (const char* s : {"a", "b", "c"}) {
        auto next = all[i];
        next.emplace_back(s);
        all.push_back(std::move(next));
      }
    }
  }
  Outcome o;
  std::size_t pairs = 0;
  for (const auto& a : all) {
    const TokenSequence sa{a};
    for (const auto& b : all) {
      const TokenSequence sb{b};
      const std::size_t expected = oracle::edit_distance(a, b);
      if (edit_distance(sa, sb) != expected) {
        o.require(false, "edit distance differs on a pair of lengths " + std::to_string(a.size()) + "/" +
                             std::to_string(b.size()));
      }
      if (a.empty() && b.empty()) {
        bool threw = false;
        try {
          ned(sa, sb);
        } catch (const Error& e) {
          threw = e.code() == ErrorCode::BothEmpty;
        }
        o.require(threw, "ned of two empty sequences did not raise BothEmpty");
      } else {
        const double want = static_cast<double>(expected) / static_cast<double>(std::max(a.size(), b.size()));
        o.require(ned(sa, sb) == want, "ned differs from oracle");
      }
      ++pairs;
    }
  }
  const double elapsed = seconds_since(start);
  o.require(elapsed < 30.0, fmt("took %.1f s", elapsed));
  if (o.pass) o.detail = std::to_string(pairs) + " pairs, " + fmt("%.2f s", elapsed);
  return o;
}

// --- DS shape ----------------------------------------------------------------

Outcome ds_shape() {
  Outcome o;
  for (double gamma : {0.1, 0.35, 0.9}) {
    const std::string g = fmt("%.2f", gamma);
    o.require(ds(0.0, gamma) == -1.0, "ds(0) != -1 at gamma " + g);
    o.require(ds(gamma, gamma) == gamma, "ds(gamma) != gamma at gamma " + g);
    const double above = ds(std::nextafter(gamma, 2.0), gamma);
    o.require(std::abs(above - ds(gamma, gamma)) < 1e-12, "continuity gap at gamma " + g);
    double prev = -2.0;
    for (int i = 0; i < 1000; ++i) {
      const double v = ds(static_cast<double>(i) / 999.0, gamma);
      o.require(v >= prev, "not monotone at gamma " + g);
      prev = v;
    }
  }
  if (o.pass) o.detail = "gamma in {0.1, 0.35, 0.9}";
  return o;
}

// --- harmonic identity -------------------------------------------------------

Outcome harmonic_identity() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  double worst = 0.0;
  for (double beta : {1.0, 4.0, 5.0, 10.0}) {
    for (int i = 0; i < 1000; ++i) {
      const double sim = std::nextafter(u(rng), 2.0);  // (0.01, 1]
      const double div = std::nextafter(u(rng), 2.0);
      const double gap = std::abs(sim + mix_term(sim, div, beta) - harmonic_bert_ibleu(sim, div, beta));
      worst = std::max(worst, gap);
    }
  }
  o.require(worst < 1e-9, fmt("max gap %.3e", worst));
  if (o.pass) o.detail = fmt("4000 draws, max gap %.2e", worst);
  return o;
}

// --- correlations ------------------------------------------------------------

Outcome correlation_oracle() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> len(3, 100);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> small(0, 4);
  double worst = 0.0;
  int tied = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = len(rng);
    std::vector<double> x(n), y(n);
    const bool ties = trial % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = ties ? small(rng) : u(rng);
      y[i] = ties && trial % 4 == 0 ? small(rng) : 0.5 * x[i] + u(rng);
    }
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }) ||
        std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) {
      x[0] += 1.0;
      y[n - 1] += 1.0;
    }
    if (ties) ++tied;
    worst = std::max(worst, std::abs(pearson(x, y) - static_cast<double>(oracle::pearson(x, y))));
    worst = std::max(worst, std::abs(spearman(x, y) - static_cast<double>(oracle::spearman(x, y))));
  }
  o.require(worst <= 1e-10, fmt("max gap %.3e", worst));
  if (o.pass) o.detail = "100 pairs (" + std::to_string(tied) + " with ties), " + fmt("max gap %.2e", worst);
  return o;
}

// --- attribution subsets -----------------------------------------------------

Outcome attribution_subsets() {
  Outcome o;
  const auto b = synthetic::benchmark({.inputs = 50, .candidates_per_input = 8, .vocab_size = 150, .seed = 31});
  SimilarityBackend backend(SimilarityBackendDescriptor{});
  const auto dist = distance_scores(b, DistKey::ToInput, 2);
  const auto sim = similarity_scores(b, backend, 2);

  // Recompute everything from scratch for the reference enumeration.
  auto recomputed_dist = [&](std::size_t i) {
    const auto& t = b.tokens(i);
    return static_cast<double>(oracle::edit_distance(t.input.tokens, t.candidate.tokens)) /
           static_cast<double>(std::max(t.input.size(), t.candidate.size()));
  };
  auto recomputed_sim = [&](std::size_t i) { return backend.sim(b.tokens(i).input, b.tokens(i).candidate); };
  using Keep = std::function<bool(double dd, double dsim)>;
  auto brute = [&](const Keep& keep) {
    std::set<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t j = 0; j < b.size(); ++j) {
      for (std::size_t k = j + 1; k < b.size(); ++k) {
        if (b.instance(j).input != b.instance(k).input) continue;
        if (keep(recomputed_dist(j) - recomputed_dist(k), recomputed_sim(j) - recomputed_sim(k))) out.emplace(j, k);
      }
    }
    return out;
  };
  auto as_set = [](const std::vector<AttributionPair>& pairs) {
    std::set<std::pair<std::size_t, std::size_t>> out;
    for (const auto& p : pairs) out.emplace(p.j, p.k);
    return out;
  };

  const auto s_sim = build_s_sim(b, dist, sim, 0.05, 0.15, false, 2);
  const auto s_div = build_s_div(b, dist, sim, 0.05, 0.10, 2);
  const auto want_sim = brute([](double dd, double dsim) { return std::abs(dd) <= 0.05 && std::abs(dsim) >= 0.15; });
  const auto want_div = brute([](double dd, double dsim) { return std::abs(dsim) <= 0.05 && std::abs(dd) >= 0.10; });
  o.require(as_set(s_sim) == want_sim, "S_sim differs from brute force");
  o.require(as_set(s_div) == want_div, "S_div differs from brute force");
  o.require(as_set(s_sim).size() == s_sim.size() && as_set(s_div).size() == s_div.size(), "duplicate pairs emitted");
  for (const auto& p : s_sim) {
    o.require(std::abs(recomputed_dist(p.j) - recomputed_dist(p.k)) <= 0.05 &&
                  std::abs(recomputed_sim(p.j) - recomputed_sim(p.k)) >= 0.15,
              "S_sim pair violates its constraints");
  }
  for (const auto& p : s_div) {
    o.require(std::abs(recomputed_sim(p.j) - recomputed_sim(p.k)) <= 0.05 &&
                  std::abs(recomputed_dist(p.j) - recomputed_dist(p.k)) >= 0.10,
              "S_div pair violates its constraints");
  }
  o.require(!s_sim.empty() && !s_div.empty(), "a subset came out empty; the check would be vacuous");
  if (o.pass) {
    o.detail = "|S_sim|=" + std::to_string(s_sim.size()) + ", |S_div|=" + std::to_string(s_div.size());
  }
  return o;
}

// --- partitions --------------------------------------------------------------

Outcome partition_contracts() {
  Outcome o;
  std::size_t checked = 0;
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const std::size_t inputs = 40 + 7 * seed;
    const auto b = synthetic::benchmark(
        {.inputs = inputs, .candidates_per_input = 3 + seed % 3, .vocab_size = 120, .seed = seed});
    for (auto key : {DistKey::ToReference, DistKey::ToInput}) {
      const auto dist = distance_scores(b, key);
      const auto groups = quartile_groups(b, dist, key);
      std::size_t lo = b.size(), hi = 0, total = 0;
      std::set<std::size_t> seen;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        lo = std::min(lo, groups[g].instance_indices.size());
        hi = std::max(hi, groups[g].instance_indices.size());
        total += groups[g].instance_indices.size();
        seen.insert(groups[g].instance_indices.begin(), groups[g].instance_indices.end());
        if (g > 0) {
          double prev_max = -1.0, cur_min = 2.0;
          for (auto i : groups[g - 1].instance_indices) prev_max = std::max(prev_max, dist[i]);
          for (auto i : groups[g].instance_indices) cur_min = std::min(cur_min, dist[i]);
          o.require(prev_max <= cur_min, "quartile boundaries decrease");
        }
      }
      o.require(groups.size() == 4 && hi - lo <= 1, "quartile sizes differ by more than one");
      o.require(total == b.size() && seen.size() == b.size(), "quartiles do not cover the benchmark");
    }
    const auto cases = case_partition(b, distance_scores(b, DistKey::ToReference), distance_scores(b, DistKey::ToInput));
    std::set<std::size_t> one(cases.case1_indices.begin(), cases.case1_indices.end());
    std::set<std::size_t> two(cases.case2_indices.begin(), cases.case2_indices.end());
    std::vector<std::size_t> both;
    std::set_intersection(one.begin(), one.end(), two.begin(), two.end(), std::back_inserter(both));
    o.require(both.empty(), "case partition overlaps");
    o.require(one.size() + two.size() == b.size(), "case partition is not exhaustive");

    const auto extended = extend_benchmark(b, 0.2, seed);
    const auto added = extended.size() - b.size();
    o.require(added == static_cast<std::size_t>(std::nearbyint(0.2 * static_cast<double>(inputs))),
              "extend added " + std::to_string(added) + " for " + std::to_string(inputs) + " inputs");
    for (std::size_t i = b.size(); i < extended.size(); ++i) {
      o.require(extended.instance(i).candidate == extended.instance(i).input, "extended candidate is not a copy");
      o.require(extended.instance(i).human_score == 0.0, "extended instance has a non-zero score");
    }
    ++checked;
  }
  if (o.pass) o.detail = std::to_string(checked) + " synthetic benchmarks";
  return o;
}

// --- copy penalty ------------------------------------------------------------

Outcome copy_penalty() {
  Outcome o;
  std::mt19937_64 rng(555);
  std::vector<std::string> vocab;
  for (int i = 0; i < 500; ++i) vocab.push_back("tok" + std::to_string(i));
  SimilarityBackend backend(SimilarityBackendDescriptor{});
  ParaScoreConfig cfg;
  const double expected = cfg.omega * (1.0 + cfg.gamma);
  double worst = 0.0;
  std::uniform_int_distribution<std::size_t> len(4, 16);
  for (int trial = 0; trial < 20; ++trial) {
    const TokenSequence x{synthetic::distinct_words(vocab, len(rng), rng)};
    TokenSequence c = x;
    // Rotation keeps the bag of tokens and moves every position.
    std::rotate(c.tokens.begin(), c.tokens.begin() + static_cast<long>(c.size() / 2), c.tokens.end());
    const double sim_xc = backend.sim(x, c), sim_xx = backend.sim(x, x);
    o.require(std::abs(sim_xc - sim_xx) <= 1e-12, "constructed C changed the similarity");
    o.require(ned(x, c) >= cfg.gamma, "constructed C is closer than gamma");
    const double gap = parascore_free(x, c, cfg, backend).total - parascore_free(x, x, cfg, backend).total;
    worst = std::max(worst, std::abs(gap - expected));
  }
  o.require(worst <= 1e-12, fmt("gap off by %.3e", worst));
  if (o.pass) o.detail = "20 inputs, " + fmt("max deviation %.1e", worst);
  return o;
}

// --- direction-level reproduction ---------------------------------------------

Benchmark direction_benchmark(std::uint64_t seed, const SimilarityBackend& backend) {
  auto items = synthetic::instances(
      {.inputs = 500, .candidates_per_input = 8, .vocab_size = 2000, .with_reference = false, .seed = seed});
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  const TokenizerConfig tok;
  for (auto& item : items) {
    const auto x = tokenize(item.input, tok), c = tokenize(item.candidate, tok);
    const double sim_true = backend.sim(x, c);
    const double ds_true = ds(ned(x, c), 0.35);
    item.human_score = std::clamp(0.9 * sim_true + 0.1 * ds_true + noise(rng), 0.0, 1.0);
  }
  return extend_benchmark(Benchmark::build("direction", "en", tok, std::move(items)), 0.2, seed);
}

Outcome direction_reproduction() {
  const auto start = Clock::now();
  Outcome o;
  SimilarityBackend backend(SimilarityBackendDescriptor{});
  const unsigned jobs = default_jobs();
  const auto grid = make_grid(0.0, 0.5, 0.01);

  auto run_once = [&](std::uint64_t seed) {
    const auto bench = direction_benchmark(seed, backend);
    const auto [dev, test] = split_dev_test(bench, {.dev_fraction = 0.10, .seed = seed});
    const auto tuned = tune_omega(dev, {}, grid, CorrelationKind::Pearson, ParaScoreMode::Free, backend, jobs);
    MetricOptions opts;
    opts.parascore.omega = tuned.omega;
    const auto human = test.human_scores();
    const double para = pearson(score_metric(test, "parascore-free", opts, backend, jobs).values, human);
    const double bare = pearson(similarity_scores(test, backend, jobs).values, human);
    return std::tuple{tuned.omega, para, bare};
  };

  const auto [omega, para, bare] = run_once(13);
  const auto [omega2, para2, bare2] = run_once(13);
  o.require(omega == omega2 && para == para2 && bare == bare2, "rerun with the same seed differs");
  o.require(para - bare >= 0.05, fmt("gap %.4f", para - bare));
  const double elapsed = seconds_since(start);
  o.require(elapsed < 120.0, fmt("took %.1f s", elapsed));
  std::ostringstream d;
  d << "omega*=" << omega << fmt(", ParaScore.Free r=%.4f", para) << fmt(", Sim r=%.4f", bare)
    << fmt(", gap=%.4f", para - bare) << fmt(", %.1f s for two runs", elapsed);
  if (o.pass) {
    o.detail = d.str();
  } else {
    o.detail += " (" + d.str() + ")";
  }
  return o;
}

// --- transcribed delta -------------------------------------------------------

Outcome table_delta() {
  Outcome o;
  const std::vector<CorrelationReport> free = {
      {"rougeL-free", 0.207, 0, 0}, {"rouge1-free", 0.267, 0, 0}, {"rouge2-free", 0.160, 0, 0}, {"bertscore-free", 0.191, 0, 0}};
  const std::vector<CorrelationReport> based = {
      {"rougeL", 0.357, 0, 0}, {"rouge1", 0.367, 0, 0}, {"rouge2", 0.256, 0, 0}, {"bertscore", 0.284, 0, 0}};
  const double delta = delta_free_vs_based(free, based);
  o.require(std::abs(delta - (-0.110)) <= 0.0005, fmt("delta %.5f", delta));
  if (o.pass) o.detail = fmt("delta=%.5f", delta);
  return o;
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"edit-distance-oracle", edit_distance_oracle},
      {"ds-shape", ds_shape},
      {"harmonic-mix-identity", harmonic_identity},
      {"correlation-oracle", correlation_oracle},
      {"attribution-subsets", attribution_subsets},
      {"partition-contracts", partition_contracts},
      {"copy-penalty", copy_penalty},
      {"direction-reproduction", direction_reproduction},
      {"free-vs-based-delta", table_delta},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    if (!outcome.pass) ++failures;
    std::printf("%s %s: %s\n", outcome.pass ? "PASS" : "FAIL", name.c_str(), outcome.detail.c_str());
    std::fflush(stdout);
  }
  // Everything above runs on the built-in fallback embeddings: no network, no service.
  const double total = seconds_since(start);
  const bool fast = total < 300.0;
  if (!fast) ++failures;
  std::printf("%s offline-suite-runtime: %.1f s, fallback provider only\n", fast ? "PASS" : "FAIL", total);
  return failures == 0 ? 0 : 1;
}
