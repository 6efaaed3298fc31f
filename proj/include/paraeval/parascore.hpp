#pragma once

#include <span>
#include <vector>

#include "paraeval/core.hpp"
#include "paraeval/lexical.hpp"
#include "paraeval/similarity.hpp"

namespace paraeval {

/// How the lexical-divergence term is shaped from the input-candidate NED.
enum class DivergenceShape {
  Sectional,  // the thresholded DS function
  Raw,        // NED itself, no threshold (ablation)
};

struct ParaScoreConfig {
  double omega = 0.05;
  double gamma = 0.35;
  DivergenceShape shape = DivergenceShape::Sectional;

  void validate() const;
};

enum class SimSource { Input, Reference };

struct CompositeScore {
  double total = 0.0;
  double sim_component = 0.0;
  double ds_component = 0.0;
  double omega = 0.0;
  SimSource which_sim = SimSource::Input;
};

/// Sectional divergence: gamma above the threshold, the line through
/// (0, -1) and (gamma, gamma) below it. Throws DomainError unless d is in [0,1].
double ds(double d, double gamma);

/// Divergence term for a given shape.
double divergence_term(double d, const ParaScoreConfig& config);

/// Combines precomputed components: max-sim + omega * DS(ned(x, c)).
/// Ties between the two similarities resolve to the input.
CompositeScore combine(double sim_input, std::optional<double> sim_reference, double dist_input,
                       const ParaScoreConfig& config);

/// max(Sim(X,C), Sim(R,C)) + omega * DS(NED(X,C)). Throws MissingReference
/// when `r` is absent.
CompositeScore parascore(const TokenSequence& x, const std::optional<TokenSequence>& r, const TokenSequence& c,
                         const ParaScoreConfig& config, const SimilarityBackend& backend);

/// Sim(X,C) + omega * DS(NED(X,C)).
CompositeScore parascore_free(const TokenSequence& x, const TokenSequence& c, const ParaScoreConfig& config,
                              const SimilarityBackend& backend);

/// Weighted harmonic mean (beta+1) / (beta/sim + 1/div) with the 0 limit when
/// either part vanishes.
double harmonic_bert_ibleu(double sim, double div, double beta);

/// Residual of the harmonic mean after extracting sim:
/// (sim*div - sim^2) / (beta*div + sim). Throws DegenerateDenominator when
/// beta*div + sim == 0.
double mix_term(double sim, double div, double beta);

/// Harmonic mean of Sim(X,C) and 1 - SelfBLEU(C,X).
double bert_ibleu(const TokenSequence& x, const TokenSequence& c, double beta, const SimilarityBackend& backend,
                  const BleuConfig& bleu_config = {});

enum class CorrelationKind { Pearson, Spearman };
enum class ParaScoreMode { Free, Based };

struct TuneResult {
  double omega = 0.0;
  double objective = 0.0;
  std::vector<double> objective_per_grid;  // aligned with the grid
};

/// Grid search over omega given precomputed per-instance components. Ties go to
/// the smaller omega. Throws EmptyGrid or DegenerateHumanScores.
TuneResult tune_omega(std::span<const double> sim_input, std::span<const double> sim_reference,
                      std::span<const double> dist_input, std::span<const double> human,
                      const ParaScoreConfig& config_template, std::span<const double> grid,
                      CorrelationKind objective, ParaScoreMode mode, unsigned jobs = 1);

/// Same search driven by a benchmark; Sim and NED are computed once per instance.
TuneResult tune_omega(const Benchmark& dev, const ParaScoreConfig& config_template, std::span<const double> grid,
                      CorrelationKind objective, ParaScoreMode mode, const SimilarityBackend& backend,
                      unsigned jobs = 1);

/// {start, start+step, ..., stop} with the endpoint included when it lies on
/// the grid (within a 1e-9 step fraction).
std::vector<double> make_grid(double start, double stop, double step);

}  // namespace paraeval
