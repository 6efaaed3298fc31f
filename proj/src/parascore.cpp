#include "paraeval/parascore.hpp"

#include <cmath>
#include <limits>

#include "paraeval/meta_eval.hpp"
#include "paraeval/parallel.hpp"

namespace paraeval {

void ParaScoreConfig::validate() const {
  if (!std::isfinite(omega) || omega < 0.0) throw Error(ErrorCode::InvalidArgument, "omega must be finite and >= 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error(ErrorCode::InvalidArgument, "gamma must lie in (0,1]");
}

double ds(double d, double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::DomainError, "gamma must be positive");
  if (!(d >= 0.0 && d <= 1.0)) throw Error(ErrorCode::DomainError, "distance " + std::to_string(d) + " outside [0,1]");
  if (d > gamma) return gamma;
  // Interpolate between (0, -1) and (gamma, gamma); both endpoints come out exact.
  const double t = d / gamma;
  return t * gamma - (1.0 - t);
}

double divergence_term(double d, const ParaScoreConfig& config) {
  if (config.shape == DivergenceShape::Raw) {
    if (!(d >= 0.0 && d <= 1.0)) throw Error(ErrorCode::DomainError, "distance outside [0,1]");
    return d;
  }
  return ds(d, config.gamma);
}

CompositeScore combine(double sim_input, std::optional<double> sim_reference, double dist_input,
                       const ParaScoreConfig& config) {
  CompositeScore s;
  s.omega = config.omega;
  s.sim_component = sim_input;
  s.which_sim = SimSource::Input;
  if (sim_reference && *sim_reference > sim_input) {
    s.sim_component = *sim_reference;
    s.which_sim = SimSource::Reference;
  }
  s.ds_component = divergence_term(dist_input, config);
  s.total = s.sim_component + config.omega * s.ds_component;
  return s;
}

CompositeScore parascore(const TokenSequence& x, const std::optional<TokenSequence>& r, const TokenSequence& c,
                         const ParaScoreConfig& config, const SimilarityBackend& backend) {
  config.validate();
  if (!r) throw Error(ErrorCode::MissingReference, "reference-based ParaScore needs a reference");
  return combine(backend.sim(x, c), backend.sim(*r, c), ned(x, c), config);
}

CompositeScore parascore_free(const TokenSequence& x, const TokenSequence& c, const ParaScoreConfig& config,
                              const SimilarityBackend& backend) {
  config.validate();
  return combine(backend.sim(x, c), std::nullopt, ned(x, c), config);
}

double harmonic_bert_ibleu(double sim, double div, double beta) {
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  if (sim <= 0.0 || div <= 0.0) return 0.0;
  return (beta + 1.0) / (beta / sim + 1.0 / div);
}

double mix_term(double sim, double div, double beta) {
  const double denom = beta * div + sim;
  if (denom == 0.0) throw Error(ErrorCode::DegenerateDenominator, "beta*div + sim is zero");
  return (sim * div - sim * sim) / denom;
}

double bert_ibleu(const TokenSequence& x, const TokenSequence& c, double beta, const SimilarityBackend& backend,
                  const BleuConfig& bleu_config) {
  const double similarity = backend.sim(x, c);
  const double divergence = 1.0 - self_bleu(c, x, bleu_config);
  return harmonic_bert_ibleu(similarity, divergence, beta);
}

TuneResult tune_omega(std::span<const double> sim_input, std::span<const double> sim_reference,
                      std::span<const double> dist_input, std::span<const double> human,
                      const ParaScoreConfig& config_template, std::span<const double> grid,
                      CorrelationKind objective, ParaScoreMode mode, unsigned jobs) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "omega grid is empty");
  const std::size_t n = human.size();
  if (sim_input.size() != n || dist_input.size() != n || (mode == ParaScoreMode::Based && sim_reference.size() != n)) {
    throw Error(ErrorCode::LengthMismatch, "tuning components are not aligned with the human scores");
  }
  if (n < 3) throw Error(ErrorCode::TooFewInstances, "tuning needs at least 3 dev instances");
  if (detail::is_constant(as_vector(human))) {
    throw Error(ErrorCode::DegenerateHumanScores, "human scores are constant on the dev set");
  }
  for (double omega : grid) {
    ParaScoreConfig probe = config_template;
    probe.omega = omega;
    probe.validate();
  }

  TuneResult result;
  result.objective_per_grid.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_for(grid.size(), jobs, [&](std::size_t g) {
    ParaScoreConfig config = config_template;
    config.omega = grid[g];
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::optional<double> ref =
          mode == ParaScoreMode::Based ? std::optional<double>(sim_reference[i]) : std::nullopt;
      scores[i] = combine(sim_input[i], ref, dist_input[i], config).total;
    }
    try {
      result.objective_per_grid[g] =
          objective == CorrelationKind::Pearson ? pearson(scores, human) : spearman(scores, human);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ConstantInput) throw;
    }
  });

  bool found = false;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double value = result.objective_per_grid[g];
    if (std::isnan(value)) continue;
    if (!found || value > result.objective || (value == result.objective && grid[g] < result.omega)) {
      result.omega = grid[g];
      result.objective = value;
      found = true;
    }
  }
  if (!found) throw Error(ErrorCode::ConstantInput, "ParaScore is constant on the dev set for every grid point");
  return result;
}

TuneResult tune_omega(const Benchmark& dev, const ParaScoreConfig& config_template, std::span<const double> grid,
                      CorrelationKind objective, ParaScoreMode mode, const SimilarityBackend& backend,
                      unsigned jobs) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "omega grid is empty");
  if (dev.empty()) throw Error(ErrorCode::TooFewInstances, "dev set is empty");
  if (mode == ParaScoreMode::Based && !dev.all_have_reference()) {
    throw Error(ErrorCode::MissingReference, "reference-based tuning needs references on every dev instance");
  }
  const std::size_t n = dev.size();
  std::vector<double> sim_x(n), sim_r(mode == ParaScoreMode::Based ? n : 0), dist(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    const auto& t = dev.tokens(i);
    sim_x[i] = backend.sim(t.input, t.candidate);
    if (mode == ParaScoreMode::Based) sim_r[i] = backend.sim(*t.reference, t.candidate);
    dist[i] = ned(t.input, t.candidate);
  });
  const auto human = dev.human_scores();
  return tune_omega(sim_x, sim_r, dist, human, config_template, grid, objective, mode, jobs);
}

std::vector<double> make_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start) || !std::isfinite(start) || !std::isfinite(stop)) {
    throw Error(ErrorCode::InvalidArgument, "grid needs start <= stop and step > 0");
  }
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
  }
  return grid;
}

}  // namespace paraeval
