#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <Eigen/Geometry>

#include "ame/mapping/mapping.hpp"
#include "ame/sim/render.hpp"

using namespace ame;
using namespace ame::mapping;

namespace {

sim::World open_world() {
  sim::World w;
  w.name = "open";
  w.bounds = {-20, -20, 20, 20};
  w.goal = {15, 15, 16, 16};
  return w;
}

saliency::SaliencyImage constant_saliency(const sim::RgbdFrame& frame, double value) {
  return {Image<double>(frame.depth.width(), frame.depth.height(), value), frame.tick};
}

}  // namespace

TEST_CASE("GridSpec covering and cell lookup") {
  const auto g = GridSpec::covering({0, 0, 22, 6}, 0.25);
  CHECK(g.width == 88);
  CHECK(g.height == 24);
  CHECK(g.cell_of(0.0, 0.0) == CellIndex{0, 0});
  CHECK(g.cell_of(0.26, 5.99) == CellIndex{1, 23});
  CHECK_FALSE(g.cell_of(-0.01, 1.0).has_value());
  CHECK_FALSE(g.cell_of(22.0, 1.0).has_value());
  CHECK(g.from_linear(g.linear({5, 7})) == CellIndex{5, 7});
  CHECK(g.cell_center({0, 0}).x == 0.125);
  const auto odd = GridSpec::covering({0, 0, 1.1, 0.3}, 0.25);
  CHECK(odd.width == 5);
  CHECK(odd.height == 2);
}

TEST_CASE("principal ray reprojects onto the optical axis") {
  sim::CameraModel cam;
  const auto p = reproject_pixel(cam, cam.intrinsics.cx, cam.intrinsics.cy, 3.0);
  CHECK((p - Eigen::Vector3d(0, 0, 3)).norm() < 1e-12);

  sim::RobotState s;
  const sim::CameraMount mount{1.0, 0.0, 0.0};
  const auto a = reproject_pixel(sim::make_camera({}, s, mount), 80, 60, 2.0);
  CHECK((a - Eigen::Vector3d(2, 0, 1)).norm() < 1e-12);
  s.theta = std::numbers::pi / 2;
  const auto b = reproject_pixel(sim::make_camera({}, s, mount), 80, 60, 2.0);
  const Eigen::Vector3d rotated = Eigen::AngleAxisd(std::numbers::pi / 2, Eigen::Vector3d::UnitZ()) * a;
  CHECK((b - rotated).norm() < 1e-12);
}

TEST_CASE("project then reproject is the identity") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-5, 5);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> pitch(-0.5, 1.2);
  int checked = 0;
  for (int k = 0; k < 2000; ++k) {
    sim::RobotState s;
    s.x = pos(rng);
    s.y = pos(rng);
    s.theta = ang(rng);
    const auto cam = sim::make_camera({}, s, {1.0 + 0.1 * pos(rng), pitch(rng), 0.3 * pos(rng)});
    const Eigen::Vector3d world(pos(rng), pos(rng), pos(rng));
    const auto px = project_point(cam, world);
    if (!px) continue;
    const auto back = reproject_pixel(cam, px->u, px->v, px->depth);
    CHECK((back - world).norm() <= 1e-9 * std::max(1.0, world.norm()));
    ++checked;
  }
  CHECK(checked > 500);
}

TEST_CASE("points behind the camera do not project") {
  sim::CameraModel cam;
  CHECK_FALSE(project_point(cam, {0, 0, -1}).has_value());
  CHECK_FALSE(project_point(cam, {0, 0, 0}).has_value());
}

TEST_CASE("cells keep the minimum saliency of their points") {
  sim::World w = open_world();
  sim::RobotState s;
  sim::Intrinsics in;
  in.width = 2;
  in.height = 1;
  in.cx = 1.0;
  in.cy = 0.5;
  in.fx = in.fy = 1000.0;
  const auto frame = sim::render_rgbd(w, sim::make_camera(in, s, {1.0, std::numbers::pi / 2 - 1e-6, 0.0}));
  saliency::SaliencyImage sal{Image<double>(2, 1), 0};
  sal.scores(0, 0) = 10.0;
  sal.scores(1, 0) = 200.0;
  const auto grid = GridSpec::covering(w.bounds, 0.25);
  const auto top = project_visible_cells(frame, sal, grid, {1.2, 1, 0.05});
  REQUIRE(top.cells.size() == 1);
  CHECK(top.cells[0].score == 10.0);
  CHECK(top.cells[0].cell == *grid.cell_of(0.0, 0.0));
}

TEST_CASE("an empty world marks exactly the floor cells hit by sampled rays") {
  const auto w = open_world();
  sim::RobotState s;
  s.x = 1.3;
  s.y = -0.7;
  s.theta = 0.4;
  const sim::Intrinsics in;
  const sim::CameraMount mount{1.0, 0.35, 0.0};
  const auto cam = sim::make_camera(in, s, mount);
  const auto frame = sim::render_rgbd(w, cam);
  const auto grid = GridSpec::covering(w.bounds, 0.25);
  const ProjectionParams params{1.2, 2, 0.05};
  const auto top = project_visible_cells(frame, constant_saliency(frame, 1.0), grid, params);

  // Analytic ray / floor-plane intersection per sampled pixel.
  const Eigen::Matrix3d rt = cam.extrinsics.rotation.transpose();
  const Eigen::Vector3d origin = cam.extrinsics.center();
  std::set<CellIndex> expected;
  for (int v = 0; v < in.height; v += params.stride) {
    for (int u = 0; u < in.width; u += params.stride) {
      const Eigen::Vector3d dir = rt * Eigen::Vector3d((u - in.cx) / in.fx, (v - in.cy) / in.fy, 1.0);
      if (!(dir.z() < 0.0)) continue;
      const double t = -origin.z() / dir.z();
      if (!(t < in.z_far)) continue;
      const Eigen::Vector3d hit = origin + t * dir;
      if (const auto c = grid.cell_of(hit.x(), hit.y())) expected.insert(*c);
    }
  }
  std::set<CellIndex> got;
  for (const auto& c : top.cells) got.insert(c.cell);
  CHECK(!expected.empty());
  CHECK(got == expected);
}

TEST_CASE("points above the robot are filtered out") {
  sim::World w = open_world();
  w.obstacles.push_back({0, {2.0, -20, 2.5, 20}, 6.0, {200, 40, 40}});
  sim::RobotState s;
  const auto cam = sim::make_camera({}, s, {1.0, 0.0, 0.0});
  const auto frame = sim::render_rgbd(w, cam);
  const auto grid = GridSpec::covering(w.bounds, 0.25);
  const auto low = project_visible_cells(frame, constant_saliency(frame, 5.0), grid, {0.5, 1, 0.05});
  const auto high = project_visible_cells(frame, constant_saliency(frame, 5.0), grid, {10.0, 1, 0.05});
  // The wall face x = 2 lies in column i = 88.
  auto wall_cells = [](const TopDownSaliency& t) {
    int n = 0;
    for (const auto& c : t.cells) n += (c.cell.i == 88) ? 1 : 0;
    return n;
  };
  CHECK(wall_cells(high) > 0);
  CHECK(wall_cells(high) >= wall_cells(low));
  CHECK(low.cells.size() <= high.cells.size());
}

TEST_CASE("misaligned saliency is rejected") {
  const auto w = open_world();
  const auto frame = sim::render_rgbd(w, sim::make_camera({}, {}, {}));
  saliency::SaliencyImage wrong{Image<double>(3, 3), 0};
  CHECK_THROWS_AS((void)project_visible_cells(frame, wrong, GridSpec::covering(w.bounds, 0.25), {}),
                  std::invalid_argument);
}

TEST_CASE("topdown raster marks unseen cells") {
  TopDownSaliency t;
  t.grid = GridSpec::covering({0, 0, 1, 0.5}, 0.25);
  t.cells.push_back({{1, 0}, 42.0});
  const auto r = topdown_raster(t);
  CHECK(r.width() == 4);
  CHECK(r.height() == 2);
  CHECK(r(1, 1) == 42.0);
  CHECK(r(0, 0) == -1.0);
  CHECK(t.score({1, 0}) == 42.0);
  CHECK_FALSE(t.contains({0, 0}));
}
