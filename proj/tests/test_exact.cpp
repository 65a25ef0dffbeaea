#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fbt/exact.hpp"
#include "fbt/simulate.hpp"
#include "oracle/brute_force.hpp"
#include "test_helpers.hpp"

using namespace fbt;

namespace {

double max_abs_diff(const PosteriorSnapshot& a, const PosteriorSnapshot& b) {
  double d = std::abs(a.p_team - b.p_team);
  for (std::size_t k = 0; k < 3; ++k) {
    d = std::max(d, std::abs(a.p_assignment[k] - b.p_assignment[k]));
    d = std::max(d, std::abs(a.p_player_legend[k] - b.p_player_legend[k]));
    d = std::max(d, std::abs(a.p_perceived[k] - b.p_perceived[k]));
  }
  return d;
}

ObservationGrid swap_markers(ObservationGrid g) {
  for (std::size_t t = 0; t < g.size(); ++t)
    for (auto& o : g[t])
      for (auto& m : o.placements) m = other(m);
  return g;
}

}  // namespace

TEST(ForwardMarginal, NoEvidenceIsLogOne) {
  const ModelParams p;
  PlayerSequence seq(50);
  EXPECT_NEAR(forward_marginal_likelihood(seq, Legend::A, Legend::B, p), 0.0, 1e-12);
}

TEST(ForwardMarginal, MatchesPathEnumerationWithOnePlacement) {
  ModelParams p;
  p.theta = {0.9, 0.8, 0.3, 0.25, 0.1, 0.35, 0.7, 0.6};
  PlayerSequence seq(5);  // tau = 4
  seq[1].fov_victim = true;
  seq[3].placements = {MarkerKind::Marker2};
  for (int o = 0; o < 2; ++o)
    for (int t = 0; t < 2; ++t) {
      const double brute = oracle::player_likelihood(seq, static_cast<Legend>(o), static_cast<Legend>(t), p);
      EXPECT_NEAR(std::exp(forward_marginal_likelihood(seq, static_cast<Legend>(o), static_cast<Legend>(t), p)), brute,
                  1e-12 * brute);
    }
}

TEST(ForwardMarginal, FovOnlyEvidenceIsNeverImpossible) {
  Rng rng(1);
  const ModelParams p;
  for (int rep = 0; rep < 50; ++rep) {
    PlayerSequence seq(200);
    for (auto& o : seq) o.fov_victim = rng.bernoulli(0.5);
    EXPECT_TRUE(std::isfinite(forward_marginal_likelihood(seq, Legend::A, Legend::A, p)));
  }
}

TEST(ForwardMarginal, LongHorizonDoesNotUnderflow) {
  const auto tr = simulate_trial(test::own_legend_params(), 900, 0.2, FovGenerator{}, 3);
  const double ll = forward_marginal_likelihood(tr.grid.player(0), Legend::A, Legend::A, test::own_legend_params());
  EXPECT_TRUE(std::isfinite(ll));
  EXPECT_LT(ll, -10.0);
}

TEST(ExactPosterior, ZeroPlacementsStayUniform) {
  const auto p = test::own_legend_params();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto tr = simulate_trial(p, 300, 0.0, FovGenerator{0.1, 3.0}, seed);
    const auto traj = exact_posterior(tr.grid, p);
    ASSERT_EQ(traj.size(), 301u);
    for (const auto& s : traj.snapshots) {
      for (double v : s.p_assignment) EXPECT_NEAR(v, 1.0 / 3.0, 1e-12);
      EXPECT_FALSE(predict(s.p_assignment).has_value());
    }
  }
}

TEST(ExactPosterior, PlayerMarkingWithLegendBIsFound) {
  const auto p = test::own_legend_params();
  ObservationGrid g(121);
  // Player 3 sees a victim, then drops marker 1 ("victim here" under legend B).
  for (std::size_t t = 10; t + 1 < g.size(); t += 10) {
    g[t][2].fov_victim = true;
    g[t + 1][2].placements = {MarkerKind::Marker1};
  }
  const auto traj = exact_posterior(g, p);
  const auto& last = traj.back();
  EXPECT_EQ(predict(last.p_assignment), AssignmentHypothesis::P3GotB);
  EXPECT_GT(last.p_player_legend[2], 0.99);
  // First placement already moves belief toward player 3.
  EXPECT_GT(traj.at(11).p_assignment[2], traj.at(10).p_assignment[2]);
}

TEST(ExactPosterior, MatchesEnumerationOnMicroInstances) {
  Rng rng(2024);
  for (int rep = 0; rep < 30; ++rep) {
    const auto p = test::random_params(rng);
    const std::size_t n = 2 + rng.below(6);  // tau in [1, 6]
    const auto g = test::random_grid(n, rng);
    const auto exact = exact_posterior(g, p).back();
    const auto brute = oracle::enumerate_posterior(g, p);
    EXPECT_LE(total_variation(exact.p_assignment, brute.p_assignment), 1e-9);
    EXPECT_LE(max_abs_diff(exact, brute), 1e-9);
  }
}

TEST(ExactPosterior, MatchesFullJointEnumeration) {
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const auto p = test::random_params(rng);
    const auto g = test::random_grid(1 + rng.below(3), rng);
    const auto exact = exact_posterior(g, p).back();
    EXPECT_LE(total_variation(exact.p_assignment, oracle::enumerate_joint_assignment(g, p)), 1e-9);
  }
}

TEST(ExactPosterior, OnlineEqualsOffline) {
  const auto p = test::own_legend_params();
  const auto tr = simulate_trial(p, 200, 0.05, FovGenerator{}, 9);
  const auto full = exact_posterior(tr.grid, p);
  for (std::size_t n : {1u, 2u, 37u, 120u, 201u}) {
    const auto part = exact_posterior(tr.grid.prefix(n), p);
    ASSERT_EQ(part.size(), n);
    EXPECT_LE(max_abs_diff(part.back(), full.at(n - 1)), 1e-12);
  }
}

TEST(ExactPosterior, PlayerPermutationEquivariance) {
  Rng rng(17);
  const std::array<std::array<std::size_t, 3>, 3> perms{{{1, 2, 0}, {2, 0, 1}, {0, 2, 1}}};
  for (int rep = 0; rep < 10; ++rep) {
    const auto p = test::random_params(rng);
    const auto g = test::random_grid(40, rng, 0.2, 0.1);
    const auto base = exact_posterior(g, p).back();
    for (const auto& perm : perms) {
      ObservationGrid h(g.size());
      for (std::size_t t = 0; t < g.size(); ++t)
        for (std::size_t i = 0; i < 3; ++i) h[t][perm[i]] = g[t][i];
      const auto moved = exact_posterior(h, p).back();
      for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(moved.p_assignment[perm[i]], base.p_assignment[i], 1e-12);
        EXPECT_NEAR(moved.p_player_legend[perm[i]], base.p_player_legend[i], 1e-12);
        EXPECT_NEAR(moved.p_perceived[perm[i]], base.p_perceived[i], 1e-12);
      }
      EXPECT_NEAR(moved.p_team, base.p_team, 1e-12);
    }
  }
}

// Swapping the marker labels together with the o and T theta slots: for theta
// with theta(p, o', t') = 1 - theta(p, o, t), as for own-legend markers,
// p_assignment is unchanged.
TEST(ExactPosterior, MarkerLegendSwapSymmetryOwnLegendTheta) {
  Rng rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    auto p = test::own_legend_params(0.6 + 0.35 * rng.uniform());
    const auto g = test::random_grid(60, rng, 0.2, 0.15);
    auto q = p;
    for (int s = 0; s < 8; ++s) {
      const auto c = EmissionConfig::from_slot(s);
      const EmissionConfig sw{c.prev_perception, other(c.player_legend), other(c.team_legend)};
      q.theta[static_cast<std::size_t>(s)] = p.theta_at(sw);
    }
    const auto a = exact_posterior(g, p).back();
    const auto b = exact_posterior(swap_markers(g), q).back();
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(a.p_assignment[k], b.p_assignment[k], 1e-12);
  }
}

// General theta: swapping markers and mapping theta(p,o,t) -> 1 - theta(p,o',t')
// mirrors the legend posteriors.
TEST(ExactPosterior, MarkerLegendSwapMirrorsLegendBeliefs) {
  Rng rng(29);
  for (int rep = 0; rep < 10; ++rep) {
    auto p = test::random_params(rng);
    p.mu_O = p.mu_T = 0.5;
    const auto g = test::random_grid(60, rng, 0.2, 0.15);
    auto q = p;
    for (int s = 0; s < 8; ++s) {
      const auto c = EmissionConfig::from_slot(s);
      q.theta[static_cast<std::size_t>(s)] = 1.0 - p.theta_at({c.prev_perception, other(c.player_legend), other(c.team_legend)});
    }
    const auto a = exact_posterior(g, p).back();
    const auto b = exact_posterior(swap_markers(g), q).back();
    EXPECT_NEAR(b.p_team, 1.0 - a.p_team, 1e-12);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_NEAR(b.p_player_legend[i], 1.0 - a.p_player_legend[i], 1e-12);
      EXPECT_NEAR(b.p_perceived[i], a.p_perceived[i], 1e-12);
    }
  }
}

TEST(ExactPosterior, UninformativeThetaKeepsAssignmentUniform) {
  Rng rng(31);
  ModelParams p;  // theta all 0.5
  for (int rep = 0; rep < 5; ++rep) {
    const auto traj = exact_posterior(test::random_grid(100, rng, 0.3, 0.3), p);
    for (const auto& s : traj.snapshots)
      for (double v : s.p_assignment) EXPECT_NEAR(v, 1.0 / 3.0, 1e-12);
  }
}

TEST(ExactPosterior, SnapshotsAreProbabilities) {
  Rng rng(37);
  const auto p = test::random_params(rng);
  const auto traj = exact_posterior(test::random_grid(300, rng, 0.1, 0.05), p);
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const auto& s = traj.snapshots[t];
    EXPECT_EQ(s.t, t);
    EXPECT_NEAR(s.p_assignment[0] + s.p_assignment[1] + s.p_assignment[2], 1.0, 1e-9);
    for (double v : s.p_perceived) EXPECT_TRUE(v >= 0.0 && v <= 1.0) << v;
  }
}

TEST(PredictAssignment, ArgmaxAndTies) {
  BeliefTrajectory traj;
  traj.snapshots.resize(3);
  traj.snapshots[0].p_assignment = {0.5, 0.3, 0.2};
  traj.snapshots[1].p_assignment = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  traj.snapshots[2].p_assignment = {0.4, 0.4, 0.2};
  EXPECT_EQ(predict_assignment(traj, 0), AssignmentHypothesis::P1GotB);
  EXPECT_FALSE(predict_assignment(traj, 1).has_value());
  EXPECT_FALSE(predict_assignment(traj, 2).has_value());
  EXPECT_THROW(predict_assignment(traj, 3), input_error);
  EXPECT_EQ(predict({0.2, 0.2 + 2e-9, 0.6 - 2e-9}), AssignmentHypothesis::P3GotB);
}

TEST(TrajectoryIo, RoundTrip) {
  const auto p = test::own_legend_params();
  const auto traj = exact_posterior(simulate_trial(p, 50, 0.1, FovGenerator{}, 4).grid, p);
  std::stringstream ss;
  write_trajectory(ss, traj);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), kTrajectoryHeader);
  EXPECT_EQ(read_trajectory(ss), traj);
  std::stringstream bad("t,x\n0,1,2\n");
  EXPECT_THROW(read_trajectory(bad), input_error);
}
