#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "ame/sim/camera.hpp"
#include "ame/sim/kinematics.hpp"
#include "ame/sim/obstacles.hpp"
#include "ame/sim/render.hpp"
#include "ame/sim/world.hpp"
#include "ame/sim/world_io.hpp"

using namespace ame;
using namespace ame::sim;

namespace {

bool reddish(Rgb c) { return c.r > c.g + 80 && c.r > c.b + 80; }

World one_box_world() {
  World w;
  w.name = "one_box";
  w.bounds = {0, 0, 10, 10};
  w.obstacles.push_back({0, {5, 4, 6, 6}, 1.0, {200, 40, 40}});
  w.goal = {8, 8, 9.5, 9.5};
  w.start_pose.x = 1;
  w.start_pose.y = 5;
  return w;
}

}  // namespace

TEST_CASE("shape_command applies the deadband and a linear ramp") {
  const VelocityLimits limits{1.0, 1.5};
  CHECK(shape_command({0.05, -0.05}, 0.1, limits) == VelocityCommand{0.0, 0.0});
  CHECK(shape_command({1.0, 0.0}, 0.1, limits) == VelocityCommand{1.0, 0.0});
  CHECK(shape_command({0.55, 0.0}, 0.1, limits).forward == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(shape_command({0.5, 0.0}, 0.1, limits).forward == doctest::Approx(0.4444444444444445).epsilon(1e-12));
  CHECK(shape_command({-1.0, -1.0}, 0.1, limits) == VelocityCommand{-1.0, -1.5});
  CHECK(shape_command({3.0, 0.0}, 0.1, limits).forward == 1.0);
  CHECK_THROWS_AS((void)shape_command({0, 0}, 1.0, limits), std::invalid_argument);
}

TEST_CASE("step_robot integrates the unicycle") {
  RobotState rest;
  CHECK(step_robot(rest, {0.0, 0.0}, 0.1) == rest);

  RobotState moving;
  moving.v = 1.0;
  const auto next = step_robot(moving, {1.0, 0.0}, 0.1);
  CHECK(next.x == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(next.y == 0.0);

  const auto from_rest = step_robot(rest, {1.0, 0.0}, 0.1, 5.0);
  CHECK(from_rest.v == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(from_rest.x == doctest::Approx(0.05).epsilon(1e-12));

  const auto spun = step_robot(rest, {0.0, std::numbers::pi}, 1.0);
  CHECK(spun.x == 0.0);
  CHECK(spun.y == 0.0);
  CHECK(std::abs(spun.theta) == doctest::Approx(std::numbers::pi));
  CHECK(spun.theta > -std::numbers::pi);
}

TEST_CASE("normalize_angle wraps into (-pi, pi]") {
  CHECK(normalize_angle(std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(normalize_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(normalize_angle(3 * std::numbers::pi / 2) == doctest::Approx(-std::numbers::pi / 2));
  CHECK(normalize_angle(0.25) == 0.25);
}

TEST_CASE("observe_obstacles reports surface distance and clamped closing speed") {
  const auto world = one_box_world();
  RobotState s;
  s.x = 3.0;
  s.y = 5.0;

  SUBCASE("stationary") {
    const auto obs = observe_obstacles(world, s, s, 0.1);
    REQUIRE(obs.size() == 1);
    CHECK(obs[0].distance == doctest::Approx(2.0 - s.footprint_radius));
    CHECK(obs[0].closing_speed == 0.0);
    CHECK(obs[0].x == 5.0);
    CHECK(obs[0].y == 5.0);
  }
  SUBCASE("approaching head-on at 1 m/s") {
    RobotState prev = s;
    prev.x -= 0.1;
    const auto obs = observe_obstacles(world, s, prev, 0.1);
    REQUIRE(obs.size() == 1);
    CHECK(obs[0].closing_speed == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("moving away") {
    RobotState prev = s;
    prev.x += 0.1;
    CHECK(observe_obstacles(world, s, prev, 0.1)[0].closing_speed == 0.0);
  }
  SUBCASE("outside the sensing radius") {
    RobotState far = s;
    far.x = 0.3;
    CHECK(observe_obstacles(world, far, far, 0.1, 2.0).empty());
  }
}

TEST_CASE("check_collision is a closed condition") {
  const auto world = one_box_world();
  RobotState s;
  s.x = 2.0;
  s.y = 2.0;
  CHECK_FALSE(check_collision(world, s));
  s.x = 5.5;
  s.y = 5.0;
  CHECK(check_collision(world, s));
  s.x = 5.0 - s.footprint_radius;
  CHECK(check_collision(world, s));
  s.x = 5.0 - s.footprint_radius - 1e-9;
  CHECK_FALSE(check_collision(world, s));
  s.x = 0.1;
  CHECK(check_collision(world, s));
}

TEST_CASE("camera_pose follows the mounting convention") {
  RobotState s;
  CameraMount level{1.0, 0.0, 0.0};
  const auto e = camera_pose(s, level);
  const Eigen::Vector3d optical = e.rotation.row(2).transpose();
  CHECK((optical - Eigen::Vector3d(1, 0, 0)).norm() < 1e-12);
  CHECK((e.center() - Eigen::Vector3d(0, 0, 1.0)).norm() < 1e-12);

  RobotState turned = s;
  turned.theta = std::numbers::pi / 2;
  const auto e2 = camera_pose(turned, {1.0, 0.35, 0.0});
  const auto e1 = camera_pose(s, {1.0, 0.35, 0.0});
  const Eigen::Matrix3d rz = Eigen::AngleAxisd(std::numbers::pi / 2, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  CHECK((e2.rotation - e1.rotation * rz.transpose()).norm() < 1e-12);
}

TEST_CASE("render_rgbd sees a fronto-parallel wall at constant depth") {
  World w;
  w.name = "wall";
  w.bounds = {0, -10, 10, 10};
  w.obstacles.push_back({0, {3, -10, 3.5, 10}, 5.0, {200, 40, 40}});
  w.goal = {0.5, 8, 1, 9};
  RobotState s;
  const auto cam = make_camera(Intrinsics{}, s, {1.0, 0.0, 0.0});
  const auto frame = render_rgbd(w, cam);
  REQUIRE(frame.depth.width() == 160);
  // Rows below v = cy + fy / 3 see the floor before the wall.
  for (int v = 0; v < 95; v += 7) {
    for (int u = 0; u < 160; u += 9) {
      CHECK(frame.depth(u, v) == doctest::Approx(3.0).epsilon(1e-9));
      CHECK(reddish(frame.rgb(u, v)));
    }
  }
}

TEST_CASE("render_rgbd on an empty world shows floor below the horizon and sky above") {
  World w;
  w.name = "empty";
  w.bounds = {-100, -100, 100, 100};
  w.goal = {50, 50, 51, 51};
  RobotState s;
  const Intrinsics in{};
  const auto frame = render_rgbd(w, make_camera(in, s, {1.0, 0.2, 0.0}));
  const double horizon_v = in.cy - in.fy * std::tan(0.2);
  for (int u = 0; u < in.width; u += 11) {
    CHECK(frame.rgb(u, 0) == kSkyColor);
    CHECK(frame.depth(u, 0) == in.z_far);
    CHECK(frame.rgb(u, in.height - 1) == w.floor_color);
    CHECK(frame.depth(u, in.height - 1) < in.z_far);
  }
  CHECK(horizon_v > 0.0);
}

TEST_CASE("render_rgbd paints a box where its corners project") {
  World w;
  w.name = "box";
  w.bounds = {-10, -10, 10, 10};
  w.obstacles.push_back({0, {4, 0.5, 4.5, 1.5}, 1.5, {220, 20, 20}});
  w.goal = {8, 8, 9, 9};
  RobotState s;
  const Intrinsics in{};
  const auto cam = make_camera(in, s, {1.0, 0.0, 0.0});
  const auto frame = render_rgbd(w, cam);
  // Front face x = 4 spans y in [0.5, 1.5] and z in [0, 1.5].
  auto project = [&](double x, double y, double z) {
    const Eigen::Vector3d p = cam.extrinsics.to_camera({x, y, z});
    return Eigen::Vector2d(in.fx * p.x() / p.z() + in.cx, in.fy * p.y() / p.z() + in.cy);
  };
  const auto a = project(4, 1.5, 1.5);
  const auto b = project(4, 0.5, 0.0);
  const int u_mid = static_cast<int>(std::lround(0.5 * (a.x() + b.x())));
  const int v_mid = static_cast<int>(std::lround(0.5 * (a.y() + b.y())));
  CHECK(reddish(frame.rgb(u_mid, v_mid)));
  CHECK(frame.depth(u_mid, v_mid) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(u_mid < static_cast<int>(in.cx));
  // The y = 0.5 side face is visible to the right of the front face.
  const auto c = project(4.5, 0.5, 0.0);
  CHECK_FALSE(reddish(frame.rgb(static_cast<int>(std::floor(a.x())) - 1, v_mid)));
  CHECK_FALSE(reddish(frame.rgb(static_cast<int>(std::ceil(c.x())) + 1, v_mid)));
  CHECK_FALSE(reddish(frame.rgb(u_mid, static_cast<int>(std::floor(a.y())) - 1)));
  CHECK(reddish(frame.rgb(static_cast<int>(std::ceil(a.x())) + 1, v_mid)));
  CHECK(reddish(frame.rgb(static_cast<int>(std::floor(b.x())) - 1, v_mid)));
}

TEST_CASE("world json round trip and hash") {
  const auto w = one_box_world();
  const auto back = world_from_json(world_to_json(w));
  CHECK(back == w);
  CHECK(world_hash(back) == world_hash(w));
  auto edited = w;
  edited.obstacles[0].footprint.max_x += 0.01;
  CHECK(world_hash(edited) != world_hash(w));
  CHECK(world_hash(w).size() == 64);
}

TEST_CASE("World::validate rejects inconsistent worlds") {
  auto w = one_box_world();
  CHECK_NOTHROW(w.validate());
  w.start_pose.x = 11.0;
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
}
