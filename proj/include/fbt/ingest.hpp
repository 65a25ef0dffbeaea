#pragma once

// Raw trial event logs and their discretization into 1 Hz observation grids.
//
// Event log: one JSON object per line.
//   {"t": 12.5, "p": 2, "k": "fov"}
//   {"t": 40.1, "p": 1, "k": "marker", "marker": 2}
//   {"t": 40.2, "p": 3, "k": "pose", "x": 1, "y": 2, "z": 3, "yaw": 90, "pitch": -10}
//   {"t": 0, "k": "victim", "id": "v7", "x": 10, "y": 60, "z": -4}
// "p" is optional on victim records, which describe the world rather than a
// player. Coordinates are y-up; yaw 0 faces +x and grows toward +z; positive
// pitch looks up. A pose is the eye position.

#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fbt/text.hpp"
#include "fbt/types.hpp"

namespace fbt {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

struct Pose {
  Vec3 position;
  double yaw = 0.0;    // degrees
  double pitch = 0.0;  // degrees
  friend bool operator==(const Pose&, const Pose&) = default;
};

struct FovGeometry {
  double horizontal_half_angle = 62.5;  // degrees, half of 125
  double vertical_half_angle = 35.0;    // degrees, half of 70

  void validate() const {
    auto ok = [](double a) { return a > 0.0 && a < 90.0; };
    if (!ok(horizontal_half_angle) || !ok(vertical_half_angle))
      throw input_error("FoV half angles must lie in (0, 90) degrees");
  }
};

// Pure angular frustum test; no occlusion.
inline bool in_fov(const Pose& pose, const Vec3& victim, const FovGeometry& geom = {}) {
  geom.validate();
  const Vec3 v{victim.x - pose.position.x, victim.y - pose.position.y, victim.z - pose.position.z};
  if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z) || !std::isfinite(pose.yaw) ||
      !std::isfinite(pose.pitch))
    throw input_error("non-finite coordinates in FoV test");
  if (v.x == 0.0 && v.y == 0.0 && v.z == 0.0) throw input_error("victim coincides with the eye position");

  constexpr double deg = std::numbers::pi / 180.0;
  const double cy = std::cos(pose.yaw * deg), sy = std::sin(pose.yaw * deg);
  const double cp = std::cos(pose.pitch * deg), sp = std::sin(pose.pitch * deg);
  const double fwd = v.x * cp * cy + v.y * sp + v.z * cp * sy;
  const double right = -v.x * sy + v.z * cy;
  const double up = -v.x * sp * cy + v.y * cp - v.z * sp * sy;

  const double horizontal = std::atan2(right, fwd) / deg;
  const double vertical = std::atan2(up, std::hypot(fwd, right)) / deg;
  return std::abs(horizontal) <= geom.horizontal_half_angle && std::abs(vertical) <= geom.vertical_half_angle;
}

struct FovVictimEvent {
  friend bool operator==(const FovVictimEvent&, const FovVictimEvent&) = default;
};
struct MarkerPlacedEvent {
  int marker = 1;  // 1, 2 or 3
  friend bool operator==(const MarkerPlacedEvent&, const MarkerPlacedEvent&) = default;
};
struct PoseEvent {
  Pose pose;
  friend bool operator==(const PoseEvent&, const PoseEvent&) = default;
};
struct VictimPositionEvent {
  std::string id;
  Vec3 position;
  friend bool operator==(const VictimPositionEvent&, const VictimPositionEvent&) = default;
};

using EventKind = std::variant<FovVictimEvent, MarkerPlacedEvent, PoseEvent, VictimPositionEvent>;

struct TrialEvent {
  double time = 0.0;
  int player = 0;  // 1..3; 0 only on victim records
  EventKind kind;
  std::size_t line = 0;  // source line, 0 when built in memory

  friend bool operator==(const TrialEvent& a, const TrialEvent& b) {
    return a.time == b.time && a.player == b.player && a.kind == b.kind;
  }
};

struct TrialEventLog {
  std::vector<TrialEvent> events;
  double mission_length = 900.0;
};

namespace detail {

inline std::size_t event_line(const TrialEvent& e, std::size_t pos) { return e.line ? e.line : pos + 1; }

inline double json_number(const nlohmann::json& j, const char* key, std::size_t line) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) throw input_error(std::string("missing numeric field '") + key + "'", line);
  return it->get<double>();
}

}  // namespace detail

inline TrialEvent parse_event(const std::string& record, std::size_t line = 0) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(record);
  } catch (const nlohmann::json::parse_error& e) {
    throw input_error(std::string("malformed JSON: ") + e.what(), line);
  }
  if (!j.is_object()) throw input_error("event record must be a JSON object", line);
  const auto k = j.find("k");
  if (k == j.end() || !k->is_string()) throw input_error("missing kind field 'k'", line);
  const std::string kind = *k;

  TrialEvent e;
  e.line = line;
  e.time = detail::json_number(j, "t", line);
  if (const auto p = j.find("p"); p != j.end()) {
    if (!p->is_number_integer()) throw input_error("player id 'p' must be an integer", line);
    e.player = p->get<int>();
  } else if (kind != "victim") {
    throw input_error("missing player id 'p'", line);
  }

  if (kind == "fov") {
    e.kind = FovVictimEvent{};
  } else if (kind == "marker") {
    const auto m = j.find("marker");
    if (m == j.end() || !m->is_number_integer()) throw input_error("missing integer field 'marker'", line);
    const int v = m->get<int>();
    if (v < 1 || v > 3) throw input_error("marker must be 1, 2 or 3", line);
    e.kind = MarkerPlacedEvent{v};
  } else if (kind == "pose") {
    e.kind = PoseEvent{Pose{{detail::json_number(j, "x", line), detail::json_number(j, "y", line),
                             detail::json_number(j, "z", line)},
                            detail::json_number(j, "yaw", line), detail::json_number(j, "pitch", line)}};
  } else if (kind == "victim") {
    VictimPositionEvent v;
    if (const auto id = j.find("id"); id != j.end()) v.id = id->is_string() ? id->get<std::string>() : id->dump();
    v.position = {detail::json_number(j, "x", line), detail::json_number(j, "y", line), detail::json_number(j, "z", line)};
    e.kind = v;
  } else {
    throw input_error("unknown event kind '" + kind + "'", line);
  }
  return e;
}

// Parses records only; ordering and player ids are checked by validate() and
// discretize().
inline TrialEventLog read_event_log(std::istream& is, double mission_length = 900.0) {
  TrialEventLog log;
  log.mission_length = mission_length;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    log.events.push_back(parse_event(line, line_no));
  }
  return log;
}

inline void write_event(std::ostream& os, const TrialEvent& e) {
  nlohmann::json j;
  j["t"] = e.time;
  if (e.player != 0) j["p"] = e.player;
  std::visit(
      [&j](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, FovVictimEvent>) {
          j["k"] = "fov";
        } else if constexpr (std::is_same_v<K, MarkerPlacedEvent>) {
          j["k"] = "marker";
          j["marker"] = k.marker;
        } else if constexpr (std::is_same_v<K, PoseEvent>) {
          j["k"] = "pose";
          j["x"] = k.pose.position.x;
          j["y"] = k.pose.position.y;
          j["z"] = k.pose.position.z;
          j["yaw"] = k.pose.yaw;
          j["pitch"] = k.pose.pitch;
        } else {
          j["k"] = "victim";
          j["id"] = k.id;
          j["x"] = k.position.x;
          j["y"] = k.position.y;
          j["z"] = k.position.z;
        }
      },
      e.kind);
  os << j.dump() << '\n';
}

inline void write_event_log(std::ostream& os, const TrialEventLog& log) {
  for (const auto& e : log.events) write_event(os, e);
}

inline std::size_t grid_ticks_for(double mission_length, double tick_seconds = 1.0) {
  return static_cast<std::size_t>(std::ceil(mission_length / tick_seconds)) + 1;
}

struct Diagnostic {
  enum class Severity { Warning, Fatal };
  Severity severity = Severity::Warning;
  std::size_t line = 0;
  std::string message;

  bool fatal() const { return severity == Severity::Fatal; }
};

inline std::vector<Diagnostic> validate(const TrialEventLog& log) {
  std::vector<Diagnostic> out;
  auto fatal = [&out](std::size_t line, std::string msg) {
    out.push_back({Diagnostic::Severity::Fatal, line, std::move(msg)});
  };
  auto warn = [&out](std::size_t line, std::string msg) {
    out.push_back({Diagnostic::Severity::Warning, line, std::move(msg)});
  };

  if (!(log.mission_length > 0.0)) fatal(0, "mission length must be positive");
  if (log.events.empty()) {
    warn(0, "no evidence: the event log is empty");
    return out;
  }
  const double end = log.mission_length > 0.0 ? static_cast<double>(grid_ticks_for(log.mission_length)) : 0.0;
  double prev = -std::numeric_limits<double>::infinity();
  std::size_t markers = 0;
  for (std::size_t pos = 0; pos < log.events.size(); ++pos) {
    const auto& e = log.events[pos];
    const auto line = detail::event_line(e, pos);
    if (!std::isfinite(e.time) || e.time < 0.0) fatal(line, "negative or non-finite timestamp");
    else if (e.time < prev) fatal(line, "event out of time order");
    else if (log.mission_length > 0.0 && e.time >= end) fatal(line, "event after the end of the mission");
    if (std::isfinite(e.time)) prev = std::max(prev, e.time);
    const bool victim = std::holds_alternative<VictimPositionEvent>(e.kind);
    if ((!victim || e.player != 0) && (e.player < 1 || e.player > 3))
      fatal(line, "unknown player id " + std::to_string(e.player));
    if (const auto* m = std::get_if<MarkerPlacedEvent>(&e.kind); m && m->marker != 3) ++markers;
  }
  if (markers == 0)
    warn(0, "no marker 1/2 placements: the legend-assignment posterior will stay uniform for this trial");
  return out;
}

// Bins events into ticks [t, t+1). Marker 3 is dropped; placements in tick 0
// move to tick 1. Pose records are tested against every victim declared so far.
inline ObservationGrid discretize(const TrialEventLog& log, double tick_seconds = 1.0,
                                  const FovGeometry& geom = {}) {
  if (!(log.mission_length > 0.0)) throw input_error("mission length must be positive");
  if (!(tick_seconds > 0.0)) throw input_error("tick length must be positive");
  const std::size_t n = grid_ticks_for(log.mission_length, tick_seconds);
  ObservationGrid grid(n);
  std::map<std::string, Vec3> victims;
  double prev = 0.0;

  for (std::size_t pos = 0; pos < log.events.size(); ++pos) {
    const auto& e = log.events[pos];
    const auto line = detail::event_line(e, pos);
    if (!std::isfinite(e.time) || e.time < 0.0) throw input_error("negative or non-finite timestamp", line);
    if (e.time < prev) throw input_error("event out of time order", line);
    prev = e.time;

    if (const auto* v = std::get_if<VictimPositionEvent>(&e.kind)) {
      if (e.player != 0 && (e.player < 1 || e.player > 3))
        throw input_error("unknown player id " + std::to_string(e.player), line);
      victims[v->id] = v->position;
      continue;
    }
    if (e.player < 1 || e.player > 3) throw input_error("unknown player id " + std::to_string(e.player), line);
    const auto tick = static_cast<std::size_t>(std::floor(e.time / tick_seconds));
    if (tick >= n) throw input_error("event after the end of the mission", line);
    auto& cell = grid[tick][static_cast<std::size_t>(e.player - 1)];

    if (std::holds_alternative<FovVictimEvent>(e.kind)) {
      cell.fov_victim = true;
    } else if (const auto* m = std::get_if<MarkerPlacedEvent>(&e.kind)) {
      if (m->marker == 3) continue;
      const auto kind = m->marker == 1 ? MarkerKind::Marker1 : MarkerKind::Marker2;
      const std::size_t at = tick == 0 ? std::min<std::size_t>(1, n - 1) : tick;
      if (at == 0) continue;
      grid[at][static_cast<std::size_t>(e.player - 1)].placements.push_back(kind);
    } else if (const auto* p = std::get_if<PoseEvent>(&e.kind)) {
      for (const auto& [id, pos_v] : victims) {
        const bool at_eye = pos_v == p->pose.position;
        if (at_eye || in_fov(p->pose, pos_v, geom)) {
          cell.fov_victim = true;
          break;
        }
      }
    }
  }
  return grid;
}

// Event log that discretizes back to the same grid: FoV and marker events at
// the integer start of each tick.
inline TrialEventLog grid_to_log(const ObservationGrid& grid) {
  TrialEventLog log;
  log.mission_length = static_cast<double>(grid.size() - 1);
  if (log.mission_length <= 0.0) log.mission_length = 1.0;
  for (std::size_t t = 0; t < grid.size(); ++t)
    for (std::size_t i = 0; i < kPlayers; ++i) {
      const auto& o = grid[t][i];
      const int player = static_cast<int>(i) + 1;
      if (o.fov_victim) log.events.push_back({static_cast<double>(t), player, FovVictimEvent{}});
      for (MarkerKind m : o.placements)
        log.events.push_back({static_cast<double>(t), player, MarkerPlacedEvent{m == MarkerKind::Marker1 ? 1 : 2}});
    }
  return log;
}

// Grid text: "tick,player,fov,placements" with placements like "1;2".
inline void write_grid(std::ostream& os, const ObservationGrid& grid) {
  os << "tick,player,fov,placements\n";
  for (std::size_t t = 0; t < grid.size(); ++t)
    for (std::size_t i = 0; i < kPlayers; ++i) {
      const auto& o = grid[t][i];
      os << t << ',' << i + 1 << ',' << (o.fov_victim ? 1 : 0) << ',';
      for (std::size_t k = 0; k < o.placements.size(); ++k)
        os << (k ? ";" : "") << (o.placements[k] == MarkerKind::Marker1 ? '1' : '2');
      os << '\n';
    }
}

inline ObservationGrid read_grid(std::istream& is) {
  std::vector<std::array<TickObservation, kPlayers>> rows;
  std::vector<std::array<bool, kPlayers>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.substr(0, 5) == "tick,") continue;
    const auto f = text::split(body, ',');
    if (f.size() != 4) throw input_error("expected 4 columns in grid row", line_no);
    const auto t = text::parse_int(f[0], line_no);
    const auto p = text::parse_int(f[1], line_no);
    const auto fov = text::parse_int(f[2], line_no);
    if (t < 0) throw input_error("negative tick", line_no);
    if (p < 1 || p > 3) throw input_error("unknown player id " + std::to_string(p), line_no);
    if (fov != 0 && fov != 1) throw input_error("fov flag must be 0 or 1", line_no);
    const auto ut = static_cast<std::size_t>(t);
    if (ut >= rows.size()) {
      rows.resize(ut + 1);
      seen.resize(ut + 1, {false, false, false});
    }
    auto& cell = rows[ut][static_cast<std::size_t>(p - 1)];
    if (seen[ut][static_cast<std::size_t>(p - 1)]) throw input_error("duplicate (tick, player) row", line_no);
    seen[ut][static_cast<std::size_t>(p - 1)] = true;
    cell.fov_victim = fov == 1;
    const auto pl = text::trim(f[3]);
    if (!pl.empty())
      for (auto m : text::split(pl, ';')) {
        const auto v = text::parse_int(m, line_no);
        if (v != 1 && v != 2) throw input_error("grid placements must be 1 or 2", line_no);
        cell.placements.push_back(v == 1 ? MarkerKind::Marker1 : MarkerKind::Marker2);
      }
  }
  for (std::size_t t = 0; t < seen.size(); ++t)
    for (bool s : seen[t])
      if (!s) throw input_error("grid is not rectangular: tick " + std::to_string(t) + " is missing a player row");
  return ObservationGrid(std::move(rows));
}

}  // namespace fbt
