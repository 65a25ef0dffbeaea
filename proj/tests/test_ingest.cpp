#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fbt/ingest.hpp"
#include "fbt/simulate.hpp"
#include "test_helpers.hpp"

using namespace fbt;

namespace {

TrialEvent ev(double t, int p, EventKind k, std::size_t line = 0) {
  TrialEvent e;
  e.time = t;
  e.player = p;
  e.kind = std::move(k);
  e.line = line;
  return e;
}

Vec3 at_angles(const Vec3& eye, double yaw_deg, double pitch_deg, double r) {
  const double d = std::numbers::pi / 180.0;
  return {eye.x + r * std::cos(pitch_deg * d) * std::cos(yaw_deg * d), eye.y + r * std::sin(pitch_deg * d),
          eye.z + r * std::cos(pitch_deg * d) * std::sin(yaw_deg * d)};
}

std::size_t line_of_error(const TrialEventLog& log) {
  try {
    discretize(log);
  } catch (const input_error& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(InFov, StraightAheadIsVisible) {
  const Pose pose{{0, 0, 0}, 0.0, 0.0};
  EXPECT_TRUE(in_fov(pose, {5, 0, 0}));
  EXPECT_FALSE(in_fov(pose, {-5, 0, 0}));
}

TEST(InFov, HalfAngleBoundaries) {
  const Pose pose{{1, 2, 3}, 0.0, 0.0};
  EXPECT_TRUE(in_fov(pose, at_angles(pose.position, 62.0, 0.0, 10.0)));
  EXPECT_FALSE(in_fov(pose, at_angles(pose.position, 63.0, 0.0, 10.0)));
  EXPECT_FALSE(in_fov(pose, at_angles(pose.position, -63.0, 0.0, 10.0)));
  EXPECT_TRUE(in_fov(pose, at_angles(pose.position, 0.0, 34.0, 10.0)));
  EXPECT_FALSE(in_fov(pose, at_angles(pose.position, 0.0, 36.0, 10.0)));
  EXPECT_FALSE(in_fov(pose, at_angles(pose.position, 0.0, -36.0, 10.0)));
}

TEST(InFov, RotatingPoseAndVictimTogetherIsInvariant) {
  Rng rng(1);
  for (int k = 0; k < 2000; ++k) {
    const Pose pose{{rng.uniform() * 10, rng.uniform() * 10, rng.uniform() * 10}, 0.0, 0.0};
    const double dyaw = rng.uniform() * 140.0 - 70.0, dpitch = rng.uniform() * 90.0 - 45.0;
    const double r = 1.0 + rng.uniform() * 20.0;
    const bool base = in_fov(pose, at_angles(pose.position, dyaw, dpitch, r));
    const double yaw = rng.uniform() * 360.0 - 180.0;
    const Pose turned{pose.position, yaw, 0.0};
    EXPECT_EQ(in_fov(turned, at_angles(pose.position, yaw + dyaw, dpitch, r)), base);
  }
}

TEST(InFov, PitchedGazeFollowsVictim) {
  const Pose up{{0, 0, 0}, 0.0, 60.0};
  EXPECT_TRUE(in_fov(up, at_angles(up.position, 0.0, 60.0, 4.0)));
  EXPECT_FALSE(in_fov(up, {5, 0, 0}));
}

TEST(InFov, DegenerateInputsThrow) {
  EXPECT_THROW(in_fov(Pose{{1, 1, 1}, 0, 0}, {1, 1, 1}), input_error);
  EXPECT_THROW(in_fov(Pose{{0, 0, 0}, NAN, 0}, {1, 0, 0}), input_error);
  EXPECT_THROW(in_fov(Pose{}, {1, 0, 0}, FovGeometry{95.0, 35.0}), input_error);
}

TEST(ParseEvent, AllKinds) {
  auto e = parse_event(R"({"t": 12.5, "p": 2, "k": "fov"})", 4);
  EXPECT_EQ(e.time, 12.5);
  EXPECT_EQ(e.player, 2);
  EXPECT_TRUE(std::holds_alternative<FovVictimEvent>(e.kind));
  EXPECT_EQ(e.line, 4u);
  e = parse_event(R"({"t": 40, "p": 1, "k": "marker", "marker": 3})");
  EXPECT_EQ(std::get<MarkerPlacedEvent>(e.kind).marker, 3);
  e = parse_event(R"({"t": 1, "p": 3, "k": "pose", "x": 1, "y": 2, "z": 3, "yaw": 90, "pitch": -10})");
  EXPECT_EQ(std::get<PoseEvent>(e.kind).pose, (Pose{{1, 2, 3}, 90, -10}));
  e = parse_event(R"({"t": 0, "k": "victim", "id": "v7", "x": 10, "y": 60, "z": -4})");
  EXPECT_EQ(e.player, 0);
  EXPECT_EQ(std::get<VictimPositionEvent>(e.kind).id, "v7");
}

TEST(ParseEvent, ErrorsCarryLineNumbers) {
  const char* bad[] = {
      "not json",
      R"([1, 2])",
      R"({"t": 1, "p": 1})",
      R"({"t": 1, "k": "fov"})",
      R"({"p": 1, "k": "fov"})",
      R"({"t": 1, "p": 1, "k": "marker", "marker": 4})",
      R"({"t": 1, "p": 1.5, "k": "fov"})",
      R"({"t": 1, "p": 1, "k": "teleport"})",
      R"({"t": 1, "p": 1, "k": "pose", "x": 1, "y": 2, "z": 3, "yaw": 0})",
  };
  for (const char* rec : bad) {
    try {
      parse_event(rec, 17);
      ADD_FAILURE() << rec;
    } catch (const input_error& e) {
      EXPECT_EQ(e.line(), 17u) << rec;
      EXPECT_NE(std::string(e.what()).find("line 17"), std::string::npos);
    }
  }
}

TEST(ReadEventLog, SkipsBlankLinesAndKeepsLineNumbers) {
  std::istringstream is("{\"t\": 1, \"p\": 1, \"k\": \"fov\"}\n\n{\"t\": 2, \"p\": 2, \"k\": \"marker\", \"marker\": 1}\n");
  const auto log = read_event_log(is, 10.0);
  ASSERT_EQ(log.events.size(), 2u);
  EXPECT_EQ(log.events[1].line, 3u);
  EXPECT_EQ(log.mission_length, 10.0);
}

TEST(Discretize, FloorBinning) {
  TrialEventLog log;
  log.mission_length = 20;
  log.events = {ev(3.4, 1, FovVictimEvent{}), ev(10.1, 2, MarkerPlacedEvent{1}), ev(10.9, 2, MarkerPlacedEvent{2})};
  const auto g = discretize(log);
  EXPECT_EQ(g.size(), 21u);
  EXPECT_TRUE(g[3][0].fov_victim);
  EXPECT_FALSE(g[4][0].fov_victim);
  EXPECT_EQ(g[10][1].placements, (std::vector<MarkerKind>{MarkerKind::Marker1, MarkerKind::Marker2}));
}

TEST(Discretize, DropsMarker3AndShiftsTickZeroPlacements) {
  TrialEventLog log;
  log.mission_length = 5;
  log.events = {ev(0.2, 3, MarkerPlacedEvent{2}), ev(0.5, 3, FovVictimEvent{}), ev(2.0, 1, MarkerPlacedEvent{3})};
  const auto g = discretize(log);
  EXPECT_TRUE(g[0][2].placements.empty());
  EXPECT_TRUE(g[0][2].fov_victim);
  EXPECT_EQ(g[1][2].placements, (std::vector<MarkerKind>{MarkerKind::Marker2}));
  EXPECT_EQ(g.placement_count(), 1u);
}

TEST(Discretize, RejectsBadLogsWithLineNumbers) {
  TrialEventLog log;
  log.mission_length = 10;
  log.events = {ev(5, 1, FovVictimEvent{}, 1), ev(4, 1, FovVictimEvent{}, 2)};
  EXPECT_EQ(line_of_error(log), 2u);
  log.events = {ev(1, 4, FovVictimEvent{}, 7)};
  EXPECT_EQ(line_of_error(log), 7u);
  log.events = {ev(-1, 1, FovVictimEvent{}, 3)};
  EXPECT_EQ(line_of_error(log), 3u);
  log.events = {ev(11.5, 1, FovVictimEvent{}, 9)};
  EXPECT_EQ(line_of_error(log), 9u);
  log.events = {ev(10.5, 1, FovVictimEvent{}, 9)};
  EXPECT_NO_THROW(discretize(log));
}

TEST(Discretize, PosesAgainstDeclaredVictims) {
  TrialEventLog log;
  log.mission_length = 10;
  log.events = {
      ev(1.0, 1, PoseEvent{Pose{{0, 0, 0}, 0, 0}}),                 // no victim known yet
      ev(2.0, 0, VictimPositionEvent{"v1", {5, 0, 0}}),
      ev(3.0, 1, PoseEvent{Pose{{0, 0, 0}, 0, 0}}),                 // looking at v1
      ev(4.0, 2, PoseEvent{Pose{{0, 0, 0}, 180, 0}}),               // facing away
      ev(5.0, 3, PoseEvent{Pose{{0, 0, 0}, 90, 0}}),                // v1 at 90 degrees
  };
  const auto g = discretize(log);
  EXPECT_FALSE(g[1][0].fov_victim);
  EXPECT_TRUE(g[3][0].fov_victim);
  EXPECT_FALSE(g[4][1].fov_victim);
  EXPECT_FALSE(g[5][2].fov_victim);
}

TEST(Validate, Diagnostics) {
  TrialEventLog empty;
  auto d = validate(empty);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_FALSE(d[0].fatal());
  EXPECT_NE(d[0].message.find("no evidence"), std::string::npos);

  TrialEventLog fov_only;
  fov_only.events = {ev(1, 1, FovVictimEvent{}), ev(2, 2, MarkerPlacedEvent{3})};
  d = validate(fov_only);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_FALSE(d[0].fatal());

  TrialEventLog bad;
  bad.mission_length = 10;
  bad.events = {ev(2, 1, MarkerPlacedEvent{1}, 1), ev(1, 1, FovVictimEvent{}, 2), ev(3, 5, FovVictimEvent{}, 3),
                ev(50, 2, FovVictimEvent{}, 4)};
  d = validate(bad);
  std::vector<std::size_t> fatal_lines;
  for (const auto& x : d)
    if (x.fatal()) fatal_lines.push_back(x.line);
  EXPECT_EQ(fatal_lines, (std::vector<std::size_t>{2, 3, 4}));
}

TEST(RoundTrip, GridToLogToGrid) {
  Rng rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    const auto g = test::random_grid(2 + rng.below(40), rng);
    const auto log = grid_to_log(g);
    const auto back = discretize(log);
    EXPECT_EQ(back.rows(), g.rows());
    EXPECT_EQ(back.placement_count(), g.placement_count());
  }
}

TEST(RoundTrip, EventLogText) {
  TrialEventLog log;
  log.events = {ev(0.0, 0, VictimPositionEvent{"a", {1, 2, 3}}), ev(1.25, 1, PoseEvent{Pose{{0, 1, 0}, 45, -5}}),
                ev(2.5, 2, FovVictimEvent{}), ev(3.75, 3, MarkerPlacedEvent{2})};
  std::ostringstream os;
  write_event_log(os, log);
  std::istringstream is(os.str());
  EXPECT_EQ(read_event_log(is).events, log.events);
}

TEST(RoundTrip, GridText) {
  const auto g = simulate_trial(test::own_legend_params(), 200, 0.1, FovGenerator{}, 4).grid;
  std::ostringstream os;
  write_grid(os, g);
  std::istringstream is(os.str());
  EXPECT_EQ(read_grid(is).rows(), g.rows());
}

TEST(ReadGrid, Errors) {
  auto parse = [](const std::string& s) {
    std::istringstream is(s);
    return read_grid(is);
  };
  EXPECT_THROW(parse("tick,player,fov,placements\n0,1,0,\n0,2,0,\n"), input_error);       // missing player 3
  EXPECT_THROW(parse("0,1,0,\n0,1,0,\n0,2,0,\n0,3,0,\n"), input_error);                   // duplicate
  EXPECT_THROW(parse("0,4,0,\n"), input_error);
  EXPECT_THROW(parse("0,1,2,\n0,2,0,\n0,3,0,\n"), input_error);
  EXPECT_THROW(parse("0,1,0,\n0,2,0,\n0,3,0,\n1,1,0,3\n1,2,0,\n1,3,0,\n"), input_error);
  EXPECT_THROW(parse("0,1,0,1\n0,2,0,\n0,3,0,\n"), input_error);  // placement at tick 0
}
