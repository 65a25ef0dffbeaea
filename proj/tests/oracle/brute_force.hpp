#pragma once

// Test-only oracles that enumerate latent perception paths explicitly. They
// share only the CPD lookups with the library, never its recursions.

#include <array>
#include <cmath>
#include <vector>

#include "fbt/model.hpp"
#include "fbt/trajectory.hpp"

namespace fbt::oracle {

inline std::vector<PerceptionState> path_from_bits(unsigned bits, std::size_t n) {
  std::vector<PerceptionState> p(n);
  for (std::size_t t = 0; t < n; ++t) p[t] = static_cast<PerceptionState>((bits >> t) & 1u);
  return p;
}

// Product of CPD entries along one path, written out longhand.
inline double path_probability(const PlayerSequence& obs, Legend o, Legend team, const std::vector<PerceptionState>& path,
                               const ModelParams& params) {
  double p = path[0] == PerceptionState::Perceived ? params.mu_P : 1.0 - params.mu_P;
  if (obs[0].fov_victim && path[0] != PerceptionState::Perceived) return 0.0;
  for (std::size_t t = 1; t < obs.size(); ++t) {
    const double theta = params.theta[static_cast<std::size_t>(4 * index(path[t - 1]) + 2 * index(o) + index(team))];
    for (MarkerKind m : obs[t].placements) p *= m == MarkerKind::Marker1 ? theta : 1.0 - theta;
    p *= path[t] == path[t - 1] ? params.p_stay : 1.0 - params.p_stay;
    if (obs[t].fov_victim && path[t] != PerceptionState::Perceived) return 0.0;
  }
  return p;
}

// Sum over all 2^n paths of one player's evidence likelihood.
inline double player_likelihood(const PlayerSequence& obs, Legend o, Legend team, const ModelParams& params) {
  double s = 0.0;
  for (unsigned b = 0; b < (1u << obs.size()); ++b) s += path_probability(obs, o, team, path_from_bits(b, obs.size()), params);
  return s;
}

// P(path | evidence, o, T) for every path, indexed by bit pattern.
inline std::vector<double> path_posterior(const PlayerSequence& obs, Legend o, Legend team, const ModelParams& params) {
  std::vector<double> w(1u << obs.size());
  double z = 0.0;
  for (unsigned b = 0; b < w.size(); ++b) z += w[b] = path_probability(obs, o, team, path_from_bits(b, obs.size()), params);
  for (auto& v : w) v /= z;
  return w;
}

// Posterior at the last tick of the grid by enumerating O-triple, T and each
// player's paths (players factorize given O and T).
inline PosteriorSnapshot enumerate_posterior(const ObservationGrid& grid, const ModelParams& params) {
  const std::size_t n = grid.size();
  std::array<PlayerSequence, kPlayers> seq;
  for (std::size_t i = 0; i < kPlayers; ++i) seq[i] = grid.player(i);

  // like[i][o][t] and perceived-mass at the last tick.
  double like[kPlayers][2][2], last_perceived[kPlayers][2][2];
  for (std::size_t i = 0; i < kPlayers; ++i)
    for (int o = 0; o < 2; ++o)
      for (int t = 0; t < 2; ++t) {
        double s = 0.0, sp = 0.0;
        for (unsigned b = 0; b < (1u << n); ++b) {
          const auto path = path_from_bits(b, n);
          const double p = path_probability(seq[i], static_cast<Legend>(o), static_cast<Legend>(t), path, params);
          s += p;
          if (path[n - 1] == PerceptionState::Perceived) sp += p;
        }
        like[i][o][t] = s;
        last_perceived[i][o][t] = sp;
      }

  PosteriorSnapshot out;
  out.t = n - 1;
  out.p_assignment = {0, 0, 0};
  out.p_team = 0;
  out.p_player_legend = {0, 0, 0};
  out.p_perceived = {0, 0, 0};
  double z = 0.0;
  for (int o1 = 0; o1 < 2; ++o1)
    for (int o2 = 0; o2 < 2; ++o2)
      for (int o3 = 0; o3 < 2; ++o3)
        for (int t = 0; t < 2; ++t) {
          const int os[3] = {o1, o2, o3};
          double prior = t ? params.mu_T : 1.0 - params.mu_T;
          for (int o : os) prior *= o ? params.mu_O : 1.0 - params.mu_O;
          double w = prior;
          for (std::size_t i = 0; i < kPlayers; ++i) w *= like[i][os[i]][t];
          // A given O: explicit truth table.
          double pa[3] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
          if (o1 + o2 + o3 == 1) {
            pa[0] = o1;
            pa[1] = o2;
            pa[2] = o3;
          }
          for (int a = 0; a < 3; ++a) out.p_assignment[static_cast<std::size_t>(a)] += w * pa[a];
          if (t) out.p_team += w;
          for (std::size_t i = 0; i < kPlayers; ++i) {
            if (os[i]) out.p_player_legend[i] += w;
            // P(P_i,last = Perceived, everything) = prior * perceived-mass_i * prod_{k != i} like_k
            double wp = prior * last_perceived[i][os[i]][t];
            for (std::size_t k = 0; k < kPlayers; ++k)
              if (k != i) wp *= like[k][os[k]][t];
            out.p_perceived[i] += wp;
          }
          z += w;
        }
  for (auto& v : out.p_assignment) v /= z;
  out.p_team /= z;
  for (auto& v : out.p_player_legend) v /= z;
  for (auto& v : out.p_perceived) v /= z;
  return out;
}

// p(A | evidence) by enumerating every latent jointly through log_joint.
// Cost 3 * 16 * 2^(3n): only for n <= 3.
inline AssignmentDist enumerate_joint_assignment(const ObservationGrid& grid, const ModelParams& params) {
  const std::size_t n = grid.size();
  AssignmentDist pa{0, 0, 0};
  double z = 0.0;
  for (std::size_t k = 0; k < kStaticConfigs; ++k) {
    const auto c = static_config(k);
    for (unsigned bits = 0; bits < (1u << (3 * n)); ++bits) {
      Latents lat;
      lat.team_legend = c.team_legend;
      lat.player_legends = c.player_legends;
      for (std::size_t i = 0; i < kPlayers; ++i) lat.perception_paths[i] = path_from_bits(bits >> (i * n), n);
      for (auto a : kAssignments) {
        lat.assignment = a;
        const double p = std::exp(log_joint(grid, lat, params));
        pa[static_cast<std::size_t>(index(a))] += p;
        z += p;
      }
    }
  }
  for (auto& v : pa) v /= z;
  return pa;
}

}  // namespace fbt::oracle
