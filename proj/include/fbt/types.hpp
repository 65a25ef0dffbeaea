#pragma once

// Domain types shared by every stage of the belief tracker.

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbt {

inline constexpr std::size_t kPlayers = 3;

// Thrown for malformed inputs: bad shapes, bad files, out-of-range arguments.
class input_error : public std::invalid_argument {
 public:
  explicit input_error(const std::string& what) : std::invalid_argument(what) {}
  input_error(const std::string& what, std::size_t line)
      : std::invalid_argument(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

// Legend B is legend A with the meanings of markers 1 and 2 swapped.
enum class Legend : std::uint8_t { A = 0, B = 1 };

// Marker 3 means the same under both legends and is never evidence.
enum class MarkerKind : std::uint8_t { Marker1 = 0, Marker2 = 1 };

enum class PerceptionState : std::uint8_t { NotPerceived = 0, Perceived = 1 };

// Which player received legend B.
enum class AssignmentHypothesis : std::uint8_t { P1GotB = 0, P2GotB = 1, P3GotB = 2 };

inline constexpr int index(Legend l) { return static_cast<int>(l); }
inline constexpr int index(MarkerKind m) { return static_cast<int>(m); }
inline constexpr int index(PerceptionState p) { return static_cast<int>(p); }
inline constexpr int index(AssignmentHypothesis a) { return static_cast<int>(a); }

inline constexpr Legend other(Legend l) { return l == Legend::A ? Legend::B : Legend::A; }
inline constexpr MarkerKind other(MarkerKind m) {
  return m == MarkerKind::Marker1 ? MarkerKind::Marker2 : MarkerKind::Marker1;
}

inline constexpr std::array<AssignmentHypothesis, 3> kAssignments{
    AssignmentHypothesis::P1GotB, AssignmentHypothesis::P2GotB, AssignmentHypothesis::P3GotB};

inline const char* to_string(Legend l) { return l == Legend::A ? "A" : "B"; }
inline const char* to_string(AssignmentHypothesis a) {
  switch (a) {
    case AssignmentHypothesis::P1GotB: return "P1GotB";
    case AssignmentHypothesis::P2GotB: return "P2GotB";
    case AssignmentHypothesis::P3GotB: return "P3GotB";
  }
  return "?";
}

inline AssignmentHypothesis assignment_from_player(int player) {
  if (player < 1 || player > 3) throw input_error("player id must be 1..3, got " + std::to_string(player));
  return static_cast<AssignmentHypothesis>(player - 1);
}

// One of the eight (previous perception, player legend, team legend) contexts
// under which a marker is placed. Slot layout: 4*perceived + 2*player_B + team_B.
struct EmissionConfig {
  PerceptionState prev_perception = PerceptionState::NotPerceived;
  Legend player_legend = Legend::A;
  Legend team_legend = Legend::A;

  // Zero-based theta slot, 0..7.
  constexpr int slot() const {
    return 4 * index(prev_perception) + 2 * index(player_legend) + index(team_legend);
  }
  // One-based index as used in parameter files, 1..8.
  constexpr int number() const { return slot() + 1; }

  static constexpr EmissionConfig from_slot(int s) {
    return EmissionConfig{static_cast<PerceptionState>((s >> 2) & 1), static_cast<Legend>((s >> 1) & 1),
                          static_cast<Legend>(s & 1)};
  }

  friend constexpr bool operator==(const EmissionConfig&, const EmissionConfig&) = default;
};

struct ModelParams {
  // Probability of Marker1 per EmissionConfig slot.
  std::array<double, 8> theta{0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
  double mu_T = 0.5;  // P(T = B)
  double mu_O = 0.5;  // P(O = B)
  double mu_P = 0.5;  // P(P_0 = Perceived)
  double p_stay = 0.8;
  std::size_t n_players = kPlayers;

  double theta_at(EmissionConfig c) const { return theta[static_cast<std::size_t>(c.slot())]; }

  // Throws input_error describing the first violated constraint.
  void validate() const {
    auto prob = [](double v, const std::string& name) {
      if (!(v >= 0.0 && v <= 1.0)) throw input_error(name + " must lie in [0,1]");
    };
    for (std::size_t j = 0; j < theta.size(); ++j) prob(theta[j], "theta[" + std::to_string(j + 1) + "]");
    prob(mu_T, "mu_T");
    prob(mu_O, "mu_O");
    prob(mu_P, "mu_P");
    prob(p_stay, "p_stay");
    if (n_players != kPlayers) throw input_error("n_players is fixed at 3");
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct TickObservation {
  bool fov_victim = false;
  std::vector<MarkerKind> placements;

  friend bool operator==(const TickObservation&, const TickObservation&) = default;
};

using PlayerSequence = std::vector<TickObservation>;

// ticks()[t][i] is player i's evidence at tick t. Always tau+1 rows.
class ObservationGrid {
 public:
  ObservationGrid() = default;
  explicit ObservationGrid(std::size_t n_ticks) : rows_(n_ticks) {}
  explicit ObservationGrid(std::vector<std::array<TickObservation, kPlayers>> rows) : rows_(std::move(rows)) {
    check();
  }

  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  // Index of the last tick.
  std::size_t horizon() const { return rows_.empty() ? 0 : rows_.size() - 1; }
  double tick_seconds() const { return 1.0; }

  const std::array<TickObservation, kPlayers>& operator[](std::size_t t) const { return rows_[t]; }
  std::array<TickObservation, kPlayers>& operator[](std::size_t t) { return rows_[t]; }
  const auto& rows() const { return rows_; }

  // Column for one player (0-based).
  PlayerSequence player(std::size_t i) const {
    PlayerSequence seq;
    seq.reserve(rows_.size());
    for (const auto& r : rows_) seq.push_back(r[i]);
    return seq;
  }

  // Rows [0, n_ticks).
  ObservationGrid prefix(std::size_t n_ticks) const {
    ObservationGrid g;
    g.rows_.assign(rows_.begin(), rows_.begin() + static_cast<std::ptrdiff_t>(std::min(n_ticks, rows_.size())));
    return g;
  }

  std::size_t placement_count() const {
    std::size_t n = 0;
    for (const auto& r : rows_)
      for (const auto& o : r) n += o.placements.size();
    return n;
  }

  void check() const {
    if (rows_.empty()) throw input_error("observation grid has no ticks");
    for (const auto& o : rows_.front())
      if (!o.placements.empty()) throw input_error("tick 0 cannot carry marker placements");
  }

  friend bool operator==(const ObservationGrid&, const ObservationGrid&) = default;

 private:
  std::vector<std::array<TickObservation, kPlayers>> rows_;
};

struct GroundTruth {
  AssignmentHypothesis assignment = AssignmentHypothesis::P1GotB;
  Legend team_legend = Legend::A;
  std::array<std::vector<PerceptionState>, kPlayers> perception_paths;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

}  // namespace fbt
