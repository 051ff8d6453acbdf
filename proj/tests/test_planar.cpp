#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epiline/planar.hpp"
#include "epiline/sim.hpp"

using namespace epiline;

namespace {

// Concurrent pencil members that genuinely cross the image, like real
// epipolar lines of visible content.
std::vector<PointLineMatch> concurrent_matches(const HomogeneousPoint& e, int k) {
  std::vector<PointLineMatch> out;
  for (int i = 0; i < k; ++i) {
    const double y = 30.0 + 420.0 * i / std::max(k - 1, 1);
    out.push_back({HomogeneousPoint(100, 100),
                   line_through(e, HomogeneousPoint(320, y)), 0.95});
  }
  return out;
}

}  // namespace

TEST_CASE("planar_epipole on exactly concurrent lines") {
  const HomogeneousPoint e(-500, 100);
  const auto matches = concurrent_matches(e, 12);
  PlanarParams params;
  const auto [est, inliers] = planar_epipole(matches, params, 640, 480);
  CHECK(inliers == 12);
  CHECK(std::hypot(est.x() - e.x(), est.y() - e.y()) < 1e-6);
}

TEST_CASE("planar_epipole needs two lines") {
  const HomogeneousPoint e(-500, 100);
  const auto one = concurrent_matches(e, 1);
  PlanarParams params;
  CHECK_THROWS_AS(planar_epipole(one, params, 640, 480), InsufficientLines);
  CHECK_THROWS_AS(planar_epipole({}, params, 640, 480), InsufficientLines);
}

TEST_CASE("planar_epipole survives 30 percent corrupted lines") {
  const HomogeneousPoint e(-480, 150);
  auto matches = concurrent_matches(e, 21);
  Rng rng(4);
  for (int i = 0; i < 9; ++i) {  // corrupt 9 of 30
    const double a = static_cast<double>(rng() % 628) / 100.0;
    matches.push_back({HomogeneousPoint(50, 50),
                       HomogeneousLine(std::cos(a), std::sin(a) + 1e-5,
                                       -100.0 - static_cast<double>(rng() % 300)),
                       0.95});
  }
  PlanarParams params;
  params.seed = 2;
  const auto [est, inliers] = planar_epipole(matches, params, 640, 480);
  CHECK(inliers >= 21);
  CHECK(area_inlier(line_through(est, HomogeneousPoint(320, 240)), e, 640, 480));
}

TEST_CASE("perpendicular inlier test variant") {
  const HomogeneousPoint e(300, 200);  // inside the image
  const auto matches = concurrent_matches(e, 10);
  PlanarParams params;
  params.perpendicular_test = true;
  const auto [est, inliers] = planar_epipole(matches, params, 640, 480);
  CHECK(inliers == 10);
  CHECK(std::hypot(est.x() - e.x(), est.y() - e.y()) < 1e-6);
}

TEST_CASE("no B detections yields no planar candidate") {
  std::vector<FrameTrack> fa, fb;
  for (int i = 0; i < 10; ++i) {
    fa.push_back({i, {}});
    fb.push_back({i, {}});
  }
  fa[1].detections.push_back({50, 50, 3});
  fa[6].detections.push_back({50, 50, 3});
  const VideoTrack tA(640, 480, std::move(fa)), tB(640, 480, std::move(fb));
  const RecurringPixel rp{HomogeneousPoint(50, 50), {{1, 0}, {6, 0}}};
  MatchParams match;
  PlanarParams params;
  CHECK_FALSE(planar_candidate(rp, tA, tB, match, params).has_value());
}

TEST_CASE("planar scene: matched lines agree with ground truth") {
  SceneConfig cfg = default_scene_config(MotionModel::Planar, 19);
  const Scene scene = generate_scene(cfg);
  MatchParams match;
  PlanarParams params;
  const auto matches = planar_candidates(scene.track_A, scene.track_B, match, params);
  CHECK(matches.size() >= 5);
  int agree = 0;
  for (const auto& m : matches) {
    CHECK(m.score >= params.theta_planar);
    if (area_inlier(m.l_B, scene.gt.e_B, cfg.width, cfg.height)) ++agree;
  }
  CHECK(agree * 2 >= static_cast<int>(matches.size()));  // majority are true

  const auto [est, inliers] = planar_epipole(matches, params, cfg.width, cfg.height);
  CHECK(inliers >= 2);
  // recovered epipole defines a pencil consistent with the true one
  const auto probe = line_through(est, HomogeneousPoint(cfg.width / 2.0,
                                                        cfg.height / 2.0));
  CHECK(area_inlier(probe, scene.gt.e_B, cfg.width, cfg.height));
}
