#pragma once

// Exact inference by enumeration of the 16 static configurations, with a
// two-state forward recursion per (player, player legend, team legend).

#include <algorithm>
#include <array>
#include <span>

#include "fbt/model.hpp"
#include "fbt/trajectory.hpp"

namespace fbt {

// Log likelihood of a tick's placements given the previous perception state.
inline double placement_log_lik(std::span<const MarkerKind> placements, PerceptionState prev, Legend o, Legend team,
                                const ModelParams& params) {
  double lp = 0.0;
  const EmissionConfig cfg{prev, o, team};
  for (MarkerKind m : placements) lp += safe_log(emission_prob(m, cfg, params));
  return lp;
}

// Scaled forward recursion over one player's perception chain. The filtered
// vector is kept normalized; the discarded mass accumulates in log_likelihood().
class PerceptionForward {
 public:
  PerceptionForward() = default;
  PerceptionForward(Legend o, Legend team, const ModelParams& params) : o_(o), team_(team), params_(&params) {}

  // The first call assimilates tick 0, later calls tick 1, 2, ...
  void observe(const TickObservation& obs) {
    std::array<double, 2> next{};
    if (ticks_ == 0) {
      if (!obs.placements.empty()) throw input_error("tick 0 cannot carry marker placements");
      next = {1.0 - params_->mu_P, params_->mu_P};
    } else {
      std::array<double, 2> lm{};
      for (int p = 0; p < 2; ++p)
        lm[static_cast<std::size_t>(p)] =
            placement_log_lik(obs.placements, static_cast<PerceptionState>(p), o_, team_, *params_);
      const double shift = std::max(lm[0], lm[1]);
      if (shift == kNegInf) {
        dead();
        ++ticks_;
        return;
      }
      log_norm_ += shift;
      for (int p = 0; p < 2; ++p) {
        const double msg = alpha_[static_cast<std::size_t>(p)] * std::exp(lm[static_cast<std::size_t>(p)] - shift);
        for (int q = 0; q < 2; ++q)
          next[static_cast<std::size_t>(q)] +=
              msg * transition_prob(static_cast<PerceptionState>(p), static_cast<PerceptionState>(q), *params_);
      }
    }
    if (obs.fov_victim) next[0] = 0.0;
    const double s = next[0] + next[1];
    ++ticks_;
    if (!(s > 0.0)) {
      dead();
      return;
    }
    log_norm_ += std::log(s);
    alpha_ = {next[0] / s, next[1] / s};
  }

  // p(P_t | evidence up to t) for the last assimilated tick.
  const std::array<double, 2>& filtered() const { return alpha_; }
  double log_likelihood() const { return log_norm_; }
  std::size_t ticks() const { return ticks_; }

 private:
  void dead() {
    alpha_ = {0.0, 0.0};
    log_norm_ = kNegInf;
  }

  Legend o_ = Legend::A;
  Legend team_ = Legend::A;
  const ModelParams* params_ = nullptr;
  std::array<double, 2> alpha_{0.0, 0.0};
  double log_norm_ = 0.0;
  std::size_t ticks_ = 0;
};

// log p(F, M of one player | o, T), summed over perception paths.
inline double forward_marginal_likelihood(std::span<const TickObservation> player_obs, Legend o, Legend team,
                                          const ModelParams& params) {
  if (player_obs.empty()) throw input_error("empty observation sequence");
  PerceptionForward fw(o, team, params);
  for (const auto& obs : player_obs) fw.observe(obs);
  return fw.log_likelihood();
}

// Online exact filter: one PerceptionForward per (player, o, T).
class ExactFilter {
 public:
  explicit ExactFilter(const ModelParams& params) : params_(params) {
    params_.validate();
    for (std::size_t i = 0; i < kPlayers; ++i)
      for (int o = 0; o < 2; ++o)
        for (int t = 0; t < 2; ++t)
          chains_[i][static_cast<std::size_t>(o)][static_cast<std::size_t>(t)] =
              PerceptionForward(static_cast<Legend>(o), static_cast<Legend>(t), params_);
  }

  ExactFilter(const ExactFilter&) = delete;
  ExactFilter& operator=(const ExactFilter&) = delete;

  PosteriorSnapshot observe(const std::array<TickObservation, kPlayers>& row) {
    PlayerLogLik ll{};
    for (std::size_t i = 0; i < kPlayers; ++i)
      for (std::size_t o = 0; o < 2; ++o)
        for (std::size_t t = 0; t < 2; ++t) {
          auto& c = chains_[i][o][t];
          c.observe(row[i]);
          ll[i][o][t] = c.log_likelihood();
        }
    const auto sm = static_marginals(ll, params_);

    PosteriorSnapshot snap;
    snap.t = tick_++;
    snap.p_assignment = sm.p_assignment;
    snap.p_team = sm.p_team;
    snap.p_player_legend = sm.p_player_legend;
    for (std::size_t i = 0; i < kPlayers; ++i) {
      double pp = 0.0;
      for (std::size_t k = 0; k < kStaticConfigs; ++k) {
        const auto c = static_config(k);
        const auto o = static_cast<std::size_t>(index(c.player_legends[i]));
        const auto t = static_cast<std::size_t>(index(c.team_legend));
        pp += sm.weights[k] * chains_[i][o][t].filtered()[1];
      }
      snap.p_perceived[i] = std::min(pp, 1.0);
    }
    return snap;
  }

 private:
  ModelParams params_;
  std::array<std::array<std::array<PerceptionForward, 2>, 2>, kPlayers> chains_;
  std::size_t tick_ = 0;
};

// Filtered posterior for every prefix of the grid in one left-to-right sweep.
inline BeliefTrajectory exact_posterior(const ObservationGrid& grid, const ModelParams& params) {
  grid.check();
  ExactFilter filter(params);
  BeliefTrajectory traj;
  traj.snapshots.reserve(grid.size());
  for (const auto& row : grid.rows()) traj.snapshots.push_back(filter.observe(row));
  return traj;
}

}  // namespace fbt
