#pragma once

// Conditional distributions of the belief model and the joint log density.
//
// Evidence semantics:
//  * F = true clamps the perception state at that tick to Perceived; F = false
//    is missing data and contributes no factor.
//  * A marker placed at tick t >= 1 is emitted from the state at t-1. Several
//    placements in one tick are independent draws from the same context. Ticks
//    without placements contribute no factor.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>

#include "fbt/types.hpp"

namespace fbt {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using PerceptionDist = std::array<double, 2>;   // indexed by PerceptionState
using MarkerDist = std::array<double, 2>;       // indexed by MarkerKind
using AssignmentDist = std::array<double, 3>;   // indexed by AssignmentHypothesis
using LegendTriple = std::array<Legend, kPlayers>;

inline double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

inline double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

inline double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// Row of the 2x2 perception transition matrix.
inline PerceptionDist perception_transition(PerceptionState prev, const ModelParams& params) {
  PerceptionDist row{};
  row[static_cast<std::size_t>(index(prev))] = params.p_stay;
  row[static_cast<std::size_t>(1 - index(prev))] = 1.0 - params.p_stay;
  return row;
}

inline double transition_prob(PerceptionState from, PerceptionState to, const ModelParams& params) {
  return from == to ? params.p_stay : 1.0 - params.p_stay;
}

inline MarkerDist marker_emission(EmissionConfig config, const ModelParams& params) {
  const double t = params.theta_at(config);
  return {t, 1.0 - t};
}

inline double emission_prob(MarkerKind m, EmissionConfig config, const ModelParams& params) {
  const double t = params.theta_at(config);
  return m == MarkerKind::Marker1 ? t : 1.0 - t;
}

inline LegendTriple legends_for(AssignmentHypothesis a) {
  LegendTriple o{Legend::A, Legend::A, Legend::A};
  o[static_cast<std::size_t>(index(a))] = Legend::B;
  return o;
}

// Point mass on the player holding B when exactly one does, uniform otherwise.
inline AssignmentDist assignment_cpd(Legend o1, Legend o2, Legend o3) {
  const int n_b = index(o1) + index(o2) + index(o3);
  if (n_b != 1) return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  AssignmentDist d{0.0, 0.0, 0.0};
  if (o1 == Legend::B) d[0] = 1.0;
  else if (o2 == Legend::B) d[1] = 1.0;
  else d[2] = 1.0;
  return d;
}

inline AssignmentDist assignment_cpd(const LegendTriple& o) { return assignment_cpd(o[0], o[1], o[2]); }

inline double bernoulli_prob(bool is_b, double mu) { return is_b ? mu : 1.0 - mu; }

// The 16 (O-triple, T) configurations, enumerated with bit i = O of player i
// and bit 3 = T.
struct StaticConfig {
  LegendTriple player_legends;
  Legend team_legend;
};

inline constexpr std::size_t kStaticConfigs = 16;

inline constexpr StaticConfig static_config(std::size_t k) {
  return StaticConfig{{static_cast<Legend>(k & 1), static_cast<Legend>((k >> 1) & 1), static_cast<Legend>((k >> 2) & 1)},
                      static_cast<Legend>((k >> 3) & 1)};
}

inline double log_static_prior(const StaticConfig& c, const ModelParams& params) {
  double lp = safe_log(bernoulli_prob(c.team_legend == Legend::B, params.mu_T));
  for (Legend o : c.player_legends) lp += safe_log(bernoulli_prob(o == Legend::B, params.mu_O));
  return lp;
}

// Per-player log likelihood of the evidence under each (player legend, team
// legend) pair, indexed [player][o][T].
using PlayerLogLik = std::array<std::array<std::array<double, 2>, 2>, kPlayers>;

struct StaticMarginals {
  double log_evidence = 0.0;                     // log sum_k prior_k * likelihood_k
  std::array<double, kStaticConfigs> weights{};  // normalized over static_config(k)
  AssignmentDist p_assignment{};
  double p_team = 0.0;
  std::array<double, kPlayers> p_player_legend{};
};

// Posterior over the 16 (O, T) configurations and the induced marginals,
// with A obtained through assignment_cpd.
inline StaticMarginals static_marginals(const PlayerLogLik& loglik, const ModelParams& params) {
  StaticMarginals out;
  std::array<double, kStaticConfigs> lp{};
  for (std::size_t k = 0; k < kStaticConfigs; ++k) {
    const auto c = static_config(k);
    double v = log_static_prior(c, params);
    for (std::size_t i = 0; i < kPlayers; ++i)
      v += loglik[i][static_cast<std::size_t>(index(c.player_legends[i]))][static_cast<std::size_t>(index(c.team_legend))];
    lp[k] = v;
  }
  const double z = log_sum_exp(lp);
  out.log_evidence = z;
  for (std::size_t k = 0; k < kStaticConfigs; ++k) {
    const double w = z == kNegInf ? 0.0 : std::exp(lp[k] - z);
    out.weights[k] = w;
    const auto c = static_config(k);
    const auto pa = assignment_cpd(c.player_legends);
    for (std::size_t a = 0; a < 3; ++a) out.p_assignment[a] += w * pa[a];
    if (c.team_legend == Legend::B) out.p_team += w;
    for (std::size_t i = 0; i < kPlayers; ++i)
      if (c.player_legends[i] == Legend::B) out.p_player_legend[i] += w;
  }
  out.p_team = std::min(out.p_team, 1.0);
  for (auto& v : out.p_player_legend) v = std::min(v, 1.0);
  return out;
}

// Complete assignment of every latent variable for one trial.
struct Latents {
  AssignmentHypothesis assignment = AssignmentHypothesis::P1GotB;
  Legend team_legend = Legend::A;
  LegendTriple player_legends{Legend::A, Legend::A, Legend::A};
  std::array<std::vector<PerceptionState>, kPlayers> perception_paths;

  // Latents matching a simulator ground truth.
  static Latents from_truth(const GroundTruth& g) {
    return Latents{g.assignment, g.team_legend, legends_for(g.assignment), g.perception_paths};
  }
};

// Log density of one player's perception path plus evidence, excluding the
// legend priors: log p(P_0) + sum_t [log p(M_t | P_{t-1}, o, T) + log p(P_t | P_{t-1})]
// with F clamps applied.
inline double log_joint_player(std::span<const TickObservation> obs, Legend o, Legend team,
                               std::span<const PerceptionState> path, const ModelParams& params) {
  if (obs.size() != path.size()) throw input_error("perception path length does not match observations");
  if (obs.empty()) throw input_error("empty observation sequence");
  auto clamp_ok = [&](std::size_t t) { return !obs[t].fov_victim || path[t] == PerceptionState::Perceived; };

  if (!clamp_ok(0)) return kNegInf;
  double lp = safe_log(bernoulli_prob(path[0] == PerceptionState::Perceived, params.mu_P));
  if (!obs[0].placements.empty()) throw input_error("tick 0 cannot carry marker placements");
  for (std::size_t t = 1; t < obs.size(); ++t) {
    const EmissionConfig cfg{path[t - 1], o, team};
    for (MarkerKind m : obs[t].placements) lp += safe_log(emission_prob(m, cfg, params));
    if (!clamp_ok(t)) return kNegInf;
    lp += safe_log(transition_prob(path[t - 1], path[t], params));
  }
  return lp;
}

inline double log_joint(const ObservationGrid& grid, const Latents& latents, const ModelParams& params) {
  grid.check();
  for (const auto& path : latents.perception_paths)
    if (path.size() != grid.size()) throw input_error("perception path length does not match grid");

  double lp = safe_log(assignment_cpd(latents.player_legends)[static_cast<std::size_t>(index(latents.assignment))]);
  lp += log_static_prior(StaticConfig{latents.player_legends, latents.team_legend}, params);
  for (std::size_t i = 0; i < kPlayers; ++i) {
    const auto seq = grid.player(i);
    lp += log_joint_player(seq, latents.player_legends[i], latents.team_legend, latents.perception_paths[i], params);
  }
  return lp;
}

}  // namespace fbt
