#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "paraeval/error.hpp"
#include "paraeval/parascore.hpp"
#include "synthetic.hpp"

using namespace paraeval;

namespace {

TokenSequence ws(const std::string& s) { return tokenize(s, TokenScheme::Whitespace); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no paraeval::Error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Ds, EndpointsAndMidpoint) {
  EXPECT_EQ(ds(0.0, 0.35), -1.0);
  EXPECT_EQ(ds(0.35, 0.35), 0.35);
  EXPECT_NEAR(ds(0.175, 0.35), -0.325, 1e-15);
  EXPECT_EQ(ds(0.9, 0.35), 0.35);
  EXPECT_EQ(code_of([] { ds(1.2, 0.35); }), ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { ds(0.5, 0.0); }), ErrorCode::DomainError);
}

TEST(Combine, PicksLargerSimilarityAndBreaksTiesToInput) {
  ParaScoreConfig cfg;
  const auto a = combine(0.9, 0.8, 0.5, cfg);
  EXPECT_NEAR(a.total, 0.9175, 1e-15);
  EXPECT_EQ(a.which_sim, SimSource::Input);
  EXPECT_EQ(combine(0.7, 0.8, 0.5, cfg).which_sim, SimSource::Reference);
  EXPECT_EQ(combine(0.8, 0.8, 0.5, cfg).which_sim, SimSource::Input);
}

TEST(Combine, AblationShapes) {
  ParaScoreConfig raw;
  raw.shape = DivergenceShape::Raw;
  EXPECT_NEAR(combine(0.5, std::nullopt, 0.8, raw).total, 0.5 + 0.05 * 0.8, 1e-15);
  ParaScoreConfig none;
  none.omega = 0.0;
  EXPECT_EQ(combine(0.5, std::nullopt, 0.0, none).total, 0.5);
}

TEST(ParaScore, NeedsReferenceWhenBased) {
  SimilarityBackend backend(SimilarityBackendDescriptor{});
  EXPECT_EQ(code_of([&] { parascore(ws("a b"), std::nullopt, ws("b a"), {}, backend); }), ErrorCode::MissingReference);
  const auto free = parascore_free(ws("a b c d"), ws("d c b a"), {}, backend);
  EXPECT_NEAR(free.total, 1.0 + 0.05 * 0.35, 1e-12);
}

TEST(BertIbleu, HarmonicMeanValues) {
  EXPECT_NEAR(harmonic_bert_ibleu(0.8, 0.5, 4.0), 5.0 / 7.0, 1e-15);
  EXPECT_NEAR(mix_term(0.8, 0.5, 4.0), -0.24 / 2.8, 1e-15);
  EXPECT_EQ(harmonic_bert_ibleu(0.0, 0.5, 4.0), 0.0);
  EXPECT_EQ(harmonic_bert_ibleu(0.5, 0.0, 4.0), 0.0);
  EXPECT_EQ(code_of([] { harmonic_bert_ibleu(0.5, 0.5, 0.0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { mix_term(0.0, 0.0, 4.0); }), ErrorCode::DegenerateDenominator);
}

TEST(BertIbleu, CopyScoresZero) {
  SimilarityBackend backend(SimilarityBackendDescriptor{});
  const auto x = ws("one two three four five");
  EXPECT_EQ(bert_ibleu(x, x, 4.0, backend), 0.0);
}

TEST(MakeGrid, IncludesEndpoint) {
  const auto g = make_grid(0.0, 0.5, 0.01);
  ASSERT_EQ(g.size(), 51u);
  EXPECT_EQ(g[17], 0.17);
  EXPECT_EQ(g.back(), 0.5);
  EXPECT_THROW(make_grid(0.0, 1.0, 0.0), Error);
}

TEST(TuneOmega, PicksArgmaxOverGridWithTiesToSmaller) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 60;
  std::vector<double> sim(n), dist(n), human(n);
  for (std::size_t i = 0; i < n; ++i) {
    sim[i] = u(rng);
    dist[i] = u(rng);
    human[i] = std::clamp(0.6 * sim[i] + 0.3 * ds(dist[i], 0.35) + 0.2 * u(rng), 0.0, 1.0);
  }
  const auto grid = make_grid(0.0, 1.0, 0.05);
  const auto tuned = tune_omega(sim, {}, dist, human, {}, grid, CorrelationKind::Pearson, ParaScoreMode::Free, 3);

  double best = -2.0, best_omega = -1.0;
  for (double w : grid) {
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = sim[i] + w * ds(dist[i], 0.35);
    const double r = static_cast<double>(oracle::pearson(s, human));
    if (r > best + 1e-12) {
      best = r;
      best_omega = w;
    }
  }
  EXPECT_EQ(tuned.omega, best_omega);
  EXPECT_NEAR(tuned.objective, best, 1e-10);
  EXPECT_EQ(tuned.objective_per_grid.size(), grid.size());

  // a grid listing the same value twice keeps the first
  const std::vector<double> twice = {0.3, 0.3};
  EXPECT_EQ(tune_omega(sim, {}, dist, human, {}, twice, CorrelationKind::Spearman, ParaScoreMode::Free).omega, 0.3);
}

TEST(TuneOmega, Errors) {
  const std::vector<double> sim = {0.1, 0.5, 0.9}, dist = {0.2, 0.4, 0.6}, flat = {0.5, 0.5, 0.5};
  EXPECT_EQ(code_of([&] { tune_omega(sim, {}, dist, sim, {}, {}, CorrelationKind::Pearson, ParaScoreMode::Free); }),
            ErrorCode::EmptyGrid);
  const std::vector<double> grid = {0.0, 0.1};
  EXPECT_EQ(code_of([&] { tune_omega(sim, {}, dist, flat, {}, grid, CorrelationKind::Pearson, ParaScoreMode::Free); }),
            ErrorCode::DegenerateHumanScores);
}

TEST(TuneOmega, BenchmarkOverloadMatchesComponents) {
  auto items = synthetic::instances({.inputs = 15, .candidates_per_input = 4});
  const auto b = Benchmark::build("t", "en", {}, items);
  SimilarityBackend backend(SimilarityBackendDescriptor{});
  const auto grid = make_grid(0.0, 0.5, 0.05);
  const auto tuned = tune_omega(b, {}, grid, CorrelationKind::Pearson, ParaScoreMode::Based, backend, 2);
  std::vector<double> sx, sr, d;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto& t = b.tokens(i);
    sx.push_back(backend.sim(t.input, t.candidate));
    sr.push_back(backend.sim(*t.reference, t.candidate));
    d.push_back(ned(t.input, t.candidate));
  }
  const auto direct = tune_omega(sx, sr, d, b.human_scores(), {}, grid, CorrelationKind::Pearson, ParaScoreMode::Based);
  EXPECT_EQ(tuned.omega, direct.omega);
  EXPECT_EQ(tuned.objective_per_grid, direct.objective_per_grid);
}
