#pragma once

#include <array>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fbt/model.hpp"
#include "fbt/text.hpp"

namespace fbt {

// Posterior marginals after assimilating ticks [0, t].
struct PosteriorSnapshot {
  std::size_t t = 0;
  AssignmentDist p_assignment{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  double p_team = 0.5;                          // P(T = B)
  std::array<double, kPlayers> p_player_legend{0.5, 0.5, 0.5};  // P(O_i = B)
  std::array<double, kPlayers> p_perceived{0.5, 0.5, 0.5};      // filtered P(P_i,t = Perceived)

  friend bool operator==(const PosteriorSnapshot&, const PosteriorSnapshot&) = default;
};

struct BeliefTrajectory {
  std::vector<PosteriorSnapshot> snapshots;

  std::size_t size() const { return snapshots.size(); }
  const PosteriorSnapshot& at(std::size_t t) const {
    if (t >= snapshots.size())
      throw input_error("tick " + std::to_string(t) + " outside trajectory of " + std::to_string(snapshots.size()) +
                        " ticks");
    return snapshots[t];
  }
  const PosteriorSnapshot& back() const { return snapshots.back(); }

  friend bool operator==(const BeliefTrajectory&, const BeliefTrajectory&) = default;
};

inline constexpr double kTieTolerance = 1e-9;

// Unique argmax, or nullopt ("no winner") when the top value is shared.
inline std::optional<AssignmentHypothesis> predict(const AssignmentDist& p) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < p.size(); ++k)
    if (p[k] > p[best]) best = k;
  for (std::size_t k = 0; k < p.size(); ++k)
    if (k != best && std::abs(p[k] - p[best]) <= kTieTolerance) return std::nullopt;
  return static_cast<AssignmentHypothesis>(best);
}

inline std::optional<AssignmentHypothesis> predict_assignment(const BeliefTrajectory& traj, std::size_t at_tick) {
  return predict(traj.at(at_tick).p_assignment);
}

inline double total_variation(const AssignmentDist& a, const AssignmentDist& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return 0.5 * s;
}

inline constexpr const char* kTrajectoryHeader = "t,pA_1,pA_2,pA_3,pT_B,pO1_B,pO2_B,pO3_B,pP1,pP2,pP3";

inline void write_trajectory(std::ostream& os, const BeliefTrajectory& traj) {
  using text::format_double;
  os << kTrajectoryHeader << '\n';
  for (const auto& s : traj.snapshots) {
    os << s.t;
    for (double v : s.p_assignment) os << ',' << format_double(v);
    os << ',' << format_double(s.p_team);
    for (double v : s.p_player_legend) os << ',' << format_double(v);
    for (double v : s.p_perceived) os << ',' << format_double(v);
    os << '\n';
  }
}

inline BeliefTrajectory read_trajectory(std::istream& is) {
  BeliefTrajectory traj;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty()) continue;
    if (line_no == 1 && body.substr(0, 2) == "t,") continue;
    const auto f = text::split(body, ',');
    if (f.size() != 11) throw input_error("expected 11 columns in trajectory row", line_no);
    PosteriorSnapshot s;
    s.t = static_cast<std::size_t>(text::parse_int(f[0], line_no));
    for (std::size_t k = 0; k < 3; ++k) s.p_assignment[k] = text::parse_double(f[1 + k], line_no);
    s.p_team = text::parse_double(f[4], line_no);
    for (std::size_t k = 0; k < 3; ++k) s.p_player_legend[k] = text::parse_double(f[5 + k], line_no);
    for (std::size_t k = 0; k < 3; ++k) s.p_perceived[k] = text::parse_double(f[8 + k], line_no);
    if (!traj.snapshots.empty() && s.t <= traj.snapshots.back().t)
      throw input_error("trajectory ticks must be strictly increasing", line_no);
    traj.snapshots.push_back(s);
  }
  return traj;
}

}  // namespace fbt
