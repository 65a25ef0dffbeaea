#pragma once

// Gibbs sampler for the shared marker-emission parameters theta under
// independent Beta(1,1) priors.
//
// One sweep:
//  1. per trial and player, draw the perception path by FFBS given theta and
//     the trial's current (O, T);
//  2. per trial, draw (O, T) given the paths. Supervised trials clamp O to
//     the known assignment and draw only T; otherwise the assignment and T are
//     drawn jointly, with O restricted to the three triples holding exactly one
//     legend B (the design of the experiment);
//  3. draw every theta_j from Beta(1 + n_j(Marker1), 1 + n_j(Marker2)) with
//     counts pooled across trials and players.
//
// The point estimate is the Rao-Blackwellised posterior mean: the average over
// kept sweeps of the conditional Beta means.

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "fbt/ffbs.hpp"
#include "fbt/model.hpp"
#include "fbt/parallel.hpp"
#include "fbt/rng.hpp"
#include "fbt/text.hpp"

namespace fbt {

struct TrainingTrial {
  ObservationGrid grid;
  std::optional<AssignmentHypothesis> assignment;
};

using TrainingCorpus = std::vector<TrainingTrial>;

struct GibbsConfig {
  std::size_t iterations = 600;
  std::size_t burn_in = 100;
  std::uint64_t seed = 0;
  bool supervised = true;
  unsigned workers = 1;

  void validate() const {
    if (iterations == 0) throw input_error("iterations must be positive");
    if (burn_in >= iterations) throw input_error("burn_in must be smaller than iterations");
  }
};

struct BetaDist {
  double a = 1.0;
  double b = 1.0;
  double mean() const { return a / (a + b); }
  double variance() const { return a * b / ((a + b) * (a + b) * (a + b + 1.0)); }
  friend bool operator==(const BetaDist&, const BetaDist&) = default;
};

// [slot][m] placement counts pooled over the corpus.
using ThetaCounts = std::array<std::array<std::uint64_t, 2>, 8>;

inline std::array<BetaDist, 8> conditional_theta(const ThetaCounts& counts) {
  std::array<BetaDist, 8> out;
  for (std::size_t j = 0; j < 8; ++j)
    out[j] = BetaDist{1.0 + static_cast<double>(counts[j][0]), 1.0 + static_cast<double>(counts[j][1])};
  return out;
}

struct PosteriorSamples {
  std::vector<std::array<double, 8>> theta_samples;  // kept draws, after burn-in
  std::vector<std::array<double, 8>> chain;          // every draw, for convergence dumps
  // Per trial, how often each assignment was held over the kept sweeps.
  std::vector<std::array<std::size_t, 3>> assignment_counts;
  std::size_t path_updates = 0;
  std::size_t static_updates = 0;
  std::size_t theta_updates = 0;
};

struct GibbsResult {
  ModelParams params;
  PosteriorSamples samples;
};

class GibbsSampler {
 public:
  struct TrialState {
    AssignmentHypothesis assignment = AssignmentHypothesis::P1GotB;
    LegendTriple player_legends{Legend::A, Legend::A, Legend::A};
    Legend team_legend = Legend::A;
    std::array<std::vector<PerceptionState>, kPlayers> paths;
    ThetaCounts counts{};
  };

  GibbsSampler(TrainingCorpus corpus, const GibbsConfig& config, const ModelParams& params_init)
      : corpus_(std::move(corpus)), config_(config), params_(params_init) {
    if (corpus_.empty()) throw input_error("training corpus is empty");
    params_.validate();
    states_.resize(corpus_.size());
    for (std::size_t k = 0; k < corpus_.size(); ++k) {
      corpus_[k].grid.check();
      Rng rng = Rng::stream(config_.seed, kInitStream, k);
      auto& st = states_[k];
      st.team_legend = rng.bernoulli(params_.mu_T) ? Legend::B : Legend::A;
      st.assignment = clamped(k) ? *corpus_[k].assignment : static_cast<AssignmentHypothesis>(rng.below(3));
      st.player_legends = legends_for(st.assignment);
    }
  }

  void sweep() {
    const auto it = iteration_++;
    parallel_for(
        corpus_.size(), config_.workers,
        [&](std::size_t b, std::size_t e) {
          for (std::size_t k = b; k < e; ++k) update_trial(k, it);
        },
        1);
    ThetaCounts pooled{};
    for (const auto& st : states_)
      for (std::size_t j = 0; j < 8; ++j)
        for (std::size_t m = 0; m < 2; ++m) pooled[j][m] += st.counts[j][m];
    Rng rng = Rng::stream(config_.seed, kThetaStream, it);
    const auto post = conditional_theta(pooled);
    for (std::size_t j = 0; j < 8; ++j) {
      conditional_mean_[j] = post[j].mean();
      params_.theta[j] = rng.beta(post[j].a, post[j].b);
    }
    path_updates_ += corpus_.size() * kPlayers;
    static_updates_ += corpus_.size();
    theta_updates_ += 8;
  }

  // Means of the Beta conditionals used by the last theta draw.
  const std::array<double, 8>& conditional_mean() const { return conditional_mean_; }
  const ModelParams& params() const { return params_; }
  ModelParams& params() { return params_; }
  const std::vector<TrialState>& states() const { return states_; }
  std::vector<TrialState>& states() { return states_; }
  const TrainingCorpus& corpus() const { return corpus_; }
  void set_grid(std::size_t k, ObservationGrid grid) { corpus_[k].grid = std::move(grid); }
  std::size_t iteration() const { return iteration_; }

  std::size_t path_updates() const { return path_updates_; }
  std::size_t static_updates() const { return static_updates_; }
  std::size_t theta_updates() const { return theta_updates_; }

  // Counts of (slot, marker) implied by the given latents.
  static ThetaCounts count_placements(const ObservationGrid& grid, const LegendTriple& legends, Legend team,
                                      const std::array<std::vector<PerceptionState>, kPlayers>& paths) {
    ThetaCounts c{};
    for (std::size_t t = 1; t < grid.size(); ++t)
      for (std::size_t i = 0; i < kPlayers; ++i)
        for (MarkerKind m : grid[t][i].placements) {
          const auto slot = static_cast<std::size_t>(EmissionConfig{paths[i][t - 1], legends[i], team}.slot());
          ++c[slot][static_cast<std::size_t>(index(m))];
        }
    return c;
  }

 private:
  static constexpr std::uint64_t kInitStream = 21, kTrialStream = 22, kThetaStream = 23;

  bool clamped(std::size_t k) const { return config_.supervised && corpus_[k].assignment.has_value(); }

  void update_trial(std::size_t k, std::size_t it) {
    Rng rng = Rng::stream(config_.seed, kTrialStream, it, k);
    const auto& grid = corpus_[k].grid;
    auto& st = states_[k];

    // Per player, counts[p][m] of marker m placed while P_{t-1} = p.
    std::array<std::array<std::array<std::uint32_t, 2>, 2>, kPlayers> pc{};
    for (std::size_t i = 0; i < kPlayers; ++i) {
      const auto seq = grid.player(i);
      st.paths[i] = ffbs_perception(seq, st.player_legends[i], st.team_legend, params_, rng);
      for (std::size_t t = 1; t < seq.size(); ++t)
        for (MarkerKind m : seq[t].placements)
          ++pc[i][static_cast<std::size_t>(index(st.paths[i][t - 1]))][static_cast<std::size_t>(index(m))];
    }

    PlayerLogLik ll{};
    for (std::size_t i = 0; i < kPlayers; ++i)
      for (int o = 0; o < 2; ++o)
        for (int t = 0; t < 2; ++t) {
          double s = 0.0;
          for (int p = 0; p < 2; ++p) {
            const EmissionConfig cfg{static_cast<PerceptionState>(p), static_cast<Legend>(o), static_cast<Legend>(t)};
            const auto& n = pc[i][static_cast<std::size_t>(p)];
            if (n[0] > 0) s += n[0] * safe_log(params_.theta_at(cfg));
            if (n[1] > 0) s += n[1] * safe_log(1.0 - params_.theta_at(cfg));
          }
          ll[i][static_cast<std::size_t>(o)][static_cast<std::size_t>(t)] = s;
        }

    // Candidates (assignment, T): a single assignment when clamped, all three otherwise.
    std::array<double, 6> lp{};
    lp.fill(kNegInf);
    for (std::size_t a = 0; a < 3; ++a) {
      if (clamped(k) && a != static_cast<std::size_t>(index(*corpus_[k].assignment))) continue;
      const auto legends = legends_for(static_cast<AssignmentHypothesis>(a));
      for (int t = 0; t < 2; ++t) {
        double v = safe_log(bernoulli_prob(t == 1, params_.mu_T));
        for (std::size_t i = 0; i < kPlayers; ++i)
          v += ll[i][static_cast<std::size_t>(index(legends[i]))][static_cast<std::size_t>(t)];
        lp[2 * a + static_cast<std::size_t>(t)] = v;
      }
    }
    const double z = log_sum_exp(lp);
    const double u = rng.uniform();
    double cum = 0.0;
    std::size_t pick = 6;
    for (std::size_t c = 0; c < lp.size(); ++c) {
      if (lp[c] == kNegInf) continue;
      cum += std::exp(lp[c] - z);
      pick = c;
      if (u < cum) break;
    }
    st.assignment = static_cast<AssignmentHypothesis>(pick / 2);
    st.player_legends = legends_for(st.assignment);
    st.team_legend = static_cast<Legend>(pick % 2);

    st.counts = ThetaCounts{};
    for (std::size_t i = 0; i < kPlayers; ++i)
      for (int p = 0; p < 2; ++p) {
        const auto slot = static_cast<std::size_t>(
            EmissionConfig{static_cast<PerceptionState>(p), st.player_legends[i], st.team_legend}.slot());
        st.counts[slot][0] += pc[i][static_cast<std::size_t>(p)][0];
        st.counts[slot][1] += pc[i][static_cast<std::size_t>(p)][1];
      }
  }

  TrainingCorpus corpus_;
  GibbsConfig config_;
  ModelParams params_;
  std::vector<TrialState> states_;
  std::array<double, 8> conditional_mean_{0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
  std::size_t iteration_ = 0;
  std::size_t path_updates_ = 0, static_updates_ = 0, theta_updates_ = 0;
};

// Returns the post-burn-in posterior mean of theta and the kept draws.
inline GibbsResult gibbs_train(const TrainingCorpus& corpus, const GibbsConfig& config, const ModelParams& params_init) {
  config.validate();
  if (corpus.empty()) throw input_error("training corpus is empty");
  GibbsSampler sampler(corpus, config, params_init);
  GibbsResult out;
  out.samples.chain.reserve(config.iterations);
  out.samples.theta_samples.reserve(config.iterations - config.burn_in);
  out.samples.assignment_counts.assign(corpus.size(), {0, 0, 0});
  std::array<double, 8> mean_sum{};
  for (std::size_t it = 0; it < config.iterations; ++it) {
    sampler.sweep();
    out.samples.chain.push_back(sampler.params().theta);
    if (it < config.burn_in) continue;
    out.samples.theta_samples.push_back(sampler.params().theta);
    for (std::size_t j = 0; j < 8; ++j) mean_sum[j] += sampler.conditional_mean()[j];
    for (std::size_t k = 0; k < corpus.size(); ++k)
      ++out.samples.assignment_counts[k][static_cast<std::size_t>(index(sampler.states()[k].assignment))];
  }
  out.params = params_init;
  const auto kept = static_cast<double>(out.samples.theta_samples.size());
  for (std::size_t j = 0; j < 8; ++j) out.params.theta[j] = mean_sum[j] / kept;
  out.samples.path_updates = sampler.path_updates();
  out.samples.static_updates = sampler.static_updates();
  out.samples.theta_updates = sampler.theta_updates();
  return out;
}

inline void write_chain(std::ostream& os, const PosteriorSamples& samples) {
  os << "iteration";
  for (int j = 1; j <= 8; ++j) os << ",theta" << j;
  os << '\n';
  for (std::size_t it = 0; it < samples.chain.size(); ++it) {
    os << it;
    for (double v : samples.chain[it]) os << ',' << text::format_double(v);
    os << '\n';
  }
}

}  // namespace fbt
