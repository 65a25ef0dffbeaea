#pragma once

// Generative simulator for synthetic trials.
//
// The experimental condition (which player got legend B) is drawn uniformly,
// the team legend from its prior. The FoV stream is exogenous: either given or
// produced by a bursty sighting process. Perception paths are drawn from the
// chain conditioned on the FoV clamps, so simulated data follows exactly the
// distribution the inference code assumes. Placement timing is a homogeneous
// Bernoulli process per tick and player; only the marker kind is modelled.

#include <array>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "fbt/ffbs.hpp"
#include "fbt/model.hpp"
#include "fbt/rng.hpp"

namespace fbt {

// Sightings start with probability onset_prob per tick and last a geometric
// number of ticks with the given mean.
struct FovGenerator {
  double onset_prob = 0.05;
  double mean_duration = 3.0;
};

// One boolean per tick per player, each of length horizon + 1.
using FovSequences = std::array<std::vector<bool>, kPlayers>;

using FovSchedule = std::variant<FovGenerator, FovSequences>;

struct SimulatedTrial {
  ObservationGrid grid;
  GroundTruth truth;
};

namespace detail {
enum Stream : std::uint64_t { kCondition = 1, kFov = 2, kPerception = 3, kPlacement = 4 };
}

inline FovSequences generate_fov(const FovGenerator& gen, std::size_t n_ticks, Rng& rng) {
  if (!(gen.onset_prob >= 0.0 && gen.onset_prob <= 1.0) || !(gen.mean_duration >= 1.0))
    throw input_error("FoV generator needs onset_prob in [0,1] and mean_duration >= 1");
  FovSequences f;
  const double end_prob = 1.0 / gen.mean_duration;
  for (auto& seq : f) {
    seq.assign(n_ticks, false);
    bool on = false;
    for (std::size_t t = 0; t < n_ticks; ++t) {
      on = on ? !rng.bernoulli(end_prob) : rng.bernoulli(gen.onset_prob);
      seq[t] = on;
    }
  }
  return f;
}

inline SimulatedTrial simulate_trial(const ModelParams& params, std::size_t horizon, double placement_rate,
                                     const FovSchedule& fov_schedule, std::uint64_t seed) {
  params.validate();
  if (horizon < 1) throw input_error("horizon must be at least 1 tick");
  if (!(placement_rate >= 0.0 && placement_rate <= 1.0)) throw input_error("placement_rate must lie in [0,1]");
  const std::size_t n = horizon + 1;

  SimulatedTrial out;
  Rng cond = Rng::stream(seed, detail::kCondition);
  out.truth.assignment = static_cast<AssignmentHypothesis>(cond.below(3));
  out.truth.team_legend = cond.bernoulli(params.mu_T) ? Legend::B : Legend::A;
  const auto legends = legends_for(out.truth.assignment);

  FovSequences fov;
  if (const auto* gen = std::get_if<FovGenerator>(&fov_schedule)) {
    Rng r = Rng::stream(seed, detail::kFov);
    fov = generate_fov(*gen, n, r);
  } else {
    fov = std::get<FovSequences>(fov_schedule);
    for (const auto& s : fov)
      if (s.size() != n) throw input_error("FoV sequence length must equal horizon + 1");
  }

  out.grid = ObservationGrid(n);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t i = 0; i < kPlayers; ++i) out.grid[t][i].fov_victim = fov[i][t];

  for (std::size_t i = 0; i < kPlayers; ++i) {
    Rng rp = Rng::stream(seed, detail::kPerception, i);
    // No placements yet, so the legends do not enter the conditional.
    const auto seq = out.grid.player(i);
    out.truth.perception_paths[i] = ffbs_perception(seq, legends[i], out.truth.team_legend, params, rp);

    Rng rm = Rng::stream(seed, detail::kPlacement, i);
    for (std::size_t t = 1; t < n; ++t) {
      if (!rm.bernoulli(placement_rate)) continue;
      const EmissionConfig cfg{out.truth.perception_paths[i][t - 1], legends[i], out.truth.team_legend};
      out.grid[t][i].placements.push_back(rm.bernoulli(params.theta_at(cfg)) ? MarkerKind::Marker1
                                                                             : MarkerKind::Marker2);
    }
  }
  return out;
}

// Redraws the kind of every placement from its emission distribution given
// the latents, keeping timing and FoV evidence.
inline ObservationGrid resimulate_markers(const ObservationGrid& grid, const LegendTriple& legends, Legend team,
                                          const std::array<std::vector<PerceptionState>, kPlayers>& paths,
                                          const ModelParams& params, Rng& rng) {
  ObservationGrid out = grid;
  for (std::size_t t = 1; t < out.size(); ++t)
    for (std::size_t i = 0; i < kPlayers; ++i)
      for (auto& m : out[t][i].placements) {
        const EmissionConfig cfg{paths[i][t - 1], legends[i], team};
        m = rng.bernoulli(params.theta_at(cfg)) ? MarkerKind::Marker1 : MarkerKind::Marker2;
      }
  return out;
}

// Marker-1 probabilities for players who mark according to their own legend
// with the given fidelity: "victim here" after a perception, "no victim"
// otherwise. The team legend does not enter.
inline std::array<double, 8> own_legend_theta(double fidelity) {
  std::array<double, 8> theta{};
  for (int s = 0; s < 8; ++s) {
    const auto c = EmissionConfig::from_slot(s);
    // Marker 1 means "no victim" under A and "victim" under B.
    const bool marker1_intended = (c.prev_perception == PerceptionState::Perceived) == (c.player_legend == Legend::B);
    theta[static_cast<std::size_t>(s)] = marker1_intended ? fidelity : 1.0 - fidelity;
  }
  return theta;
}

}  // namespace fbt
