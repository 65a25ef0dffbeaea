#pragma once

// Rao-Blackwellised particle filter.
//
// A particle samples the perception states only. Given a perception path the
// static latents (O-triple, T, A) have a closed-form posterior that depends on
// the path solely through per-player counts n[p][m] of marker m placed while
// the previous state was p, so a particle stores its current states and those
// counts rather than the path.
//
// Per tick:
//  1. placements reweight by the posterior predictive of the observed markers
//     (ratio of the count-based evidence after and before the update);
//  2. states propagate from the transition prior; F = true clamps to
//     Perceived and reweights by the probability of moving there;
//  3. weights are normalized and systematically resampled when the effective
//     sample size drops below ess_threshold_fraction * N.
//
// Random draws come from streams keyed by (seed, tick, particle), so results
// are bit-identical for any worker count.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "fbt/model.hpp"
#include "fbt/parallel.hpp"
#include "fbt/rng.hpp"
#include "fbt/trajectory.hpp"

namespace fbt {

struct FilterConfig {
  std::size_t n_particles = 5000;
  double ess_threshold_fraction = 0.5;
  unsigned workers = 1;

  void validate() const {
    if (n_particles < 1) throw input_error("n_particles must be at least 1");
    if (!(ess_threshold_fraction > 0.0 && ess_threshold_fraction <= 1.0))
      throw input_error("ess_threshold_fraction must lie in (0,1]");
  }
};

// counts[i][p][m]: player i placed marker m while P_{t-1} = p.
using PlacementCounts = std::array<std::array<std::array<std::uint32_t, 2>, 2>, kPlayers>;

struct Particle {
  std::array<PerceptionState, kPlayers> current_perception{};
  PlacementCounts counts{};
  double log_weight = 0.0;
  // Analytic posterior of the static latents given counts.
  StaticMarginals analytic{};
};

struct FilterState {
  std::vector<Particle> particles;
  std::size_t tick = 0;  // next tick to assimilate
  std::uint64_t rng_seed = 0;
  FilterConfig config;
  std::size_t resample_count = 0;
};

namespace detail {

enum RbpfStream : std::uint64_t { kInit = 11, kPropagate = 12, kResample = 13 };

struct LogTheta {
  // [slot][m]
  std::array<std::array<double, 2>, 8> v{};
  explicit LogTheta(const ModelParams& params) {
    for (std::size_t j = 0; j < 8; ++j) v[j] = {safe_log(params.theta[j]), safe_log(1.0 - params.theta[j])};
  }
};

inline PlayerLogLik counts_log_lik(const PlacementCounts& counts, const LogTheta& lt) {
  PlayerLogLik ll{};
  for (std::size_t i = 0; i < kPlayers; ++i)
    for (int o = 0; o < 2; ++o)
      for (int t = 0; t < 2; ++t) {
        double s = 0.0;
        for (int p = 0; p < 2; ++p) {
          const auto slot = static_cast<std::size_t>(
              EmissionConfig{static_cast<PerceptionState>(p), static_cast<Legend>(o), static_cast<Legend>(t)}.slot());
          for (std::size_t m = 0; m < 2; ++m) {
            const auto n = counts[i][static_cast<std::size_t>(p)][m];
            if (n > 0) s += n * lt.v[slot][m];
          }
        }
        ll[i][static_cast<std::size_t>(o)][static_cast<std::size_t>(t)] = s;
      }
  return ll;
}

}  // namespace detail

// Analytic (O, T, A) posterior implied by a set of placement counts.
inline StaticMarginals analytic_posterior(const PlacementCounts& counts, const ModelParams& params) {
  return static_marginals(detail::counts_log_lik(counts, detail::LogTheta(params)), params);
}

inline FilterState init(const FilterConfig& config, const ModelParams& params, std::uint64_t seed) {
  config.validate();
  params.validate();
  FilterState s;
  s.config = config;
  s.rng_seed = seed;
  const auto prior = analytic_posterior(PlacementCounts{}, params);
  s.particles.resize(config.n_particles);
  const double lw = -std::log(static_cast<double>(config.n_particles));
  for (std::size_t n = 0; n < config.n_particles; ++n) {
    Rng rng = Rng::stream(seed, detail::kInit, n);
    auto& p = s.particles[n];
    for (auto& st : p.current_perception)
      st = rng.bernoulli(params.mu_P) ? PerceptionState::Perceived : PerceptionState::NotPerceived;
    p.log_weight = lw;
    p.analytic = prior;
  }
  return s;
}

inline double effective_sample_size(const FilterState& state) {
  double s = 0.0, s2 = 0.0;
  for (const auto& p : state.particles) {
    const double w = std::exp(p.log_weight);
    s += w;
    s2 += w * w;
  }
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

namespace detail {

// Normalizes log weights in index order; returns false if every weight is zero.
inline bool normalize(std::vector<Particle>& ps) {
  double m = kNegInf;
  for (const auto& p : ps) m = std::max(m, p.log_weight);
  if (m == kNegInf) return false;
  double s = 0.0;
  for (const auto& p : ps) s += std::exp(p.log_weight - m);
  const double z = m + std::log(s);
  for (auto& p : ps) p.log_weight -= z;
  return true;
}

inline void systematic_resample(FilterState& state) {
  auto& ps = state.particles;
  const std::size_t n = ps.size();
  Rng rng = Rng::stream(state.rng_seed, kResample, state.tick);
  const double u0 = rng.uniform();
  std::vector<Particle> out;
  out.reserve(n);
  double cum = std::exp(ps[0].log_weight);
  std::size_t src = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double u = (u0 + static_cast<double>(k)) / static_cast<double>(n);
    while (u > cum && src + 1 < n) cum += std::exp(ps[++src].log_weight);
    out.push_back(ps[src]);
  }
  const double lw = -std::log(static_cast<double>(n));
  for (auto& p : out) p.log_weight = lw;
  ps = std::move(out);
  ++state.resample_count;
}

}  // namespace detail

inline void step(FilterState& state, const std::array<TickObservation, kPlayers>& obs, const ModelParams& params) {
  const std::size_t t = state.tick;
  bool any_placement = false;
  for (const auto& o : obs) any_placement |= !o.placements.empty();
  if (t == 0 && any_placement) throw input_error("tick 0 cannot carry marker placements");

  const detail::LogTheta lt(params);
  const double log_to_perceived_from[2] = {safe_log(1.0 - params.p_stay), safe_log(params.p_stay)};
  const double log_mu_p = safe_log(params.mu_P);

  parallel_for(state.particles.size(), state.config.workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t n = b; n < e; ++n) {
      auto& p = state.particles[n];
      if (t == 0) {
        for (std::size_t i = 0; i < kPlayers; ++i)
          if (obs[i].fov_victim) {
            p.current_perception[i] = PerceptionState::Perceived;
            p.log_weight += log_mu_p;
          }
        continue;
      }
      if (any_placement) {
        for (std::size_t i = 0; i < kPlayers; ++i)
          for (MarkerKind m : obs[i].placements)
            ++p.counts[i][static_cast<std::size_t>(index(p.current_perception[i]))][static_cast<std::size_t>(index(m))];
        const auto updated = static_marginals(detail::counts_log_lik(p.counts, lt), params);
        p.log_weight += updated.log_evidence - p.analytic.log_evidence;
        p.analytic = updated;
      }
      Rng rng = Rng::stream(state.rng_seed, detail::kPropagate, t, n);
      for (std::size_t i = 0; i < kPlayers; ++i) {
        auto& cur = p.current_perception[i];
        if (obs[i].fov_victim) {
          p.log_weight += log_to_perceived_from[index(cur)];
          cur = PerceptionState::Perceived;
        } else {
          const bool stay = rng.bernoulli(params.p_stay);
          if (!stay) cur = cur == PerceptionState::Perceived ? PerceptionState::NotPerceived : PerceptionState::Perceived;
        }
      }
    }
  });

  if (!detail::normalize(state.particles)) throw input_error("all particle weights vanished at tick " + std::to_string(t));
  const double ess = effective_sample_size(state);
  if (ess < state.config.ess_threshold_fraction * static_cast<double>(state.particles.size()))
    detail::systematic_resample(state);
  ++state.tick;
}

inline void step(FilterState& state, std::span<const TickObservation> obs, const ModelParams& params) {
  if (obs.size() != kPlayers)
    throw input_error("expected observations for 3 players, got " + std::to_string(obs.size()));
  std::array<TickObservation, kPlayers> row;
  std::copy(obs.begin(), obs.end(), row.begin());
  step(state, row, params);
}

// Weighted mixture of the particles' analytic posteriors plus empirical
// perception marginals, for the last assimilated tick.
inline PosteriorSnapshot posterior_snapshot(const FilterState& state, const ModelParams&) {
  PosteriorSnapshot snap;
  snap.t = state.tick == 0 ? 0 : state.tick - 1;
  snap.p_assignment = {0.0, 0.0, 0.0};
  snap.p_team = 0.0;
  snap.p_player_legend = {0.0, 0.0, 0.0};
  snap.p_perceived = {0.0, 0.0, 0.0};
  double total = 0.0;
  for (const auto& p : state.particles) {
    const double w = std::exp(p.log_weight);
    total += w;
    for (std::size_t a = 0; a < 3; ++a) snap.p_assignment[a] += w * p.analytic.p_assignment[a];
    snap.p_team += w * p.analytic.p_team;
    for (std::size_t i = 0; i < kPlayers; ++i) {
      snap.p_player_legend[i] += w * p.analytic.p_player_legend[i];
      if (p.current_perception[i] == PerceptionState::Perceived) snap.p_perceived[i] += w;
    }
  }
  auto scale = [total](double& v) { v /= total; };
  for (auto& v : snap.p_assignment) scale(v);
  scale(snap.p_team);
  for (auto& v : snap.p_player_legend) scale(v);
  for (auto& v : snap.p_perceived) v = std::min(v / total, 1.0);
  return snap;
}

inline BeliefTrajectory run_trial(const ObservationGrid& grid, const FilterConfig& config, const ModelParams& params,
                                  std::uint64_t seed) {
  grid.check();
  auto state = init(config, params, seed);
  BeliefTrajectory traj;
  traj.snapshots.reserve(grid.size());
  for (const auto& row : grid.rows()) {
    step(state, row, params);
    traj.snapshots.push_back(posterior_snapshot(state, params));
  }
  return traj;
}

}  // namespace fbt
