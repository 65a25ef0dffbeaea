#pragma once

// Forward-filter backward-sample for one player's perception chain.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fbt/exact.hpp"
#include "fbt/rng.hpp"

namespace fbt {

// Exact joint draw of P_0..P_tau from p(P | F, M, o, T).
inline std::vector<PerceptionState> ffbs_perception(std::span<const TickObservation> player_obs, Legend o,
                                                    Legend team, const ModelParams& params, Rng& rng) {
  if (player_obs.empty()) throw input_error("empty observation sequence");
  const std::size_t n = player_obs.size();
  std::vector<std::array<double, 2>> alpha(n);
  PerceptionForward fw(o, team, params);
  for (std::size_t t = 0; t < n; ++t) {
    fw.observe(player_obs[t]);
    alpha[t] = fw.filtered();
  }
  if (fw.log_likelihood() == kNegInf) throw input_error("evidence has zero probability under the model");

  std::vector<PerceptionState> path(n);
  auto draw = [&rng](double w0, double w1) {
    return rng.uniform() * (w0 + w1) < w1 ? PerceptionState::Perceived : PerceptionState::NotPerceived;
  };
  path[n - 1] = draw(alpha[n - 1][0], alpha[n - 1][1]);
  for (std::size_t t = n - 1; t >= 1; --t) {
    std::array<double, 2> lm{};
    for (int p = 0; p < 2; ++p)
      lm[static_cast<std::size_t>(p)] =
          placement_log_lik(player_obs[t].placements, static_cast<PerceptionState>(p), o, team, params);
    const double shift = std::max(lm[0], lm[1]);
    std::array<double, 2> w{};
    for (int p = 0; p < 2; ++p) {
      const auto ps = static_cast<std::size_t>(p);
      w[ps] = alpha[t - 1][ps] * std::exp(lm[ps] - shift) *
              transition_prob(static_cast<PerceptionState>(p), path[t], params);
    }
    path[t - 1] = draw(w[0], w[1]);
  }
  return path;
}

inline std::vector<PerceptionState> ffbs_perception(std::span<const TickObservation> player_obs, Legend o,
                                                    Legend team, const ModelParams& params, std::uint64_t seed) {
  Rng rng(stream_key(seed));
  return ffbs_perception(player_obs, o, team, params, rng);
}

}  // namespace fbt
