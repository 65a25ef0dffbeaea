#pragma once

// Bootstrap particle filter that samples O and T per particle instead of
// marginalizing them. Reference for the variance comparison only.

#include <array>
#include <cmath>
#include <vector>

#include "fbt/model.hpp"
#include "fbt/rng.hpp"

namespace fbt::oracle {

inline AssignmentDist plain_pf_assignment(const ObservationGrid& grid, const ModelParams& params, std::size_t n_particles,
                                          std::uint64_t seed) {
  struct P {
    std::array<PerceptionState, kPlayers> cur;
    LegendTriple o;
    Legend t;
    double lw;
  };
  std::vector<P> ps(n_particles);
  for (std::size_t n = 0; n < n_particles; ++n) {
    Rng r = Rng::stream(seed, 1, n);
    for (auto& c : ps[n].cur) c = r.bernoulli(params.mu_P) ? PerceptionState::Perceived : PerceptionState::NotPerceived;
    for (auto& o : ps[n].o) o = r.bernoulli(params.mu_O) ? Legend::B : Legend::A;
    ps[n].t = r.bernoulli(params.mu_T) ? Legend::B : Legend::A;
    ps[n].lw = 0.0;
  }
  for (std::size_t t = 0; t < grid.size(); ++t) {
    for (std::size_t n = 0; n < n_particles; ++n) {
      auto& p = ps[n];
      Rng r = Rng::stream(seed, 2, t, n);
      for (std::size_t i = 0; i < kPlayers; ++i) {
        const auto& obs = grid[t][i];
        if (t == 0) {
          if (obs.fov_victim) {
            p.cur[i] = PerceptionState::Perceived;
            p.lw += std::log(params.mu_P);
          }
          continue;
        }
        for (MarkerKind m : obs.placements) p.lw += safe_log(emission_prob(m, {p.cur[i], p.o[i], p.t}, params));
        if (obs.fov_victim) {
          p.lw += safe_log(transition_prob(p.cur[i], PerceptionState::Perceived, params));
          p.cur[i] = PerceptionState::Perceived;
        } else if (!r.bernoulli(params.p_stay)) {
          p.cur[i] = p.cur[i] == PerceptionState::Perceived ? PerceptionState::NotPerceived : PerceptionState::Perceived;
        }
      }
    }
    double m = kNegInf;
    for (const auto& p : ps) m = std::max(m, p.lw);
    double s = 0.0, s2 = 0.0;
    for (const auto& p : ps) {
      const double w = std::exp(p.lw - m);
      s += w;
      s2 += w * w;
    }
    if (s * s / s2 < 0.5 * static_cast<double>(n_particles)) {
      Rng r = Rng::stream(seed, 3, t);
      const double u0 = r.uniform();
      std::vector<P> out;
      out.reserve(n_particles);
      double cum = std::exp(ps[0].lw - m) / s;
      std::size_t src = 0;
      for (std::size_t k = 0; k < n_particles; ++k) {
        const double u = (u0 + static_cast<double>(k)) / static_cast<double>(n_particles);
        while (u > cum && src + 1 < n_particles) cum += std::exp(ps[++src].lw - m) / s;
        out.push_back(ps[src]);
        out.back().lw = 0.0;
      }
      ps = std::move(out);
    }
  }
  double m = kNegInf;
  for (const auto& p : ps) m = std::max(m, p.lw);
  AssignmentDist pa{0, 0, 0};
  double z = 0.0;
  for (const auto& p : ps) {
    const double w = std::exp(p.lw - m);
    const auto cpd = assignment_cpd(p.o);
    for (std::size_t a = 0; a < 3; ++a) pa[a] += w * cpd[a];
    z += w;
  }
  for (auto& v : pa) v /= z;
  return pa;
}

}  // namespace fbt::oracle
