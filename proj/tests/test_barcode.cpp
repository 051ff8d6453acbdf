#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epiline/barcode.hpp"
#include "epiline/sim.hpp"

using namespace epiline;

namespace {

VideoTrack empty_track(int n_frames, int w = 640, int h = 480) {
  std::vector<FrameTrack> frames;
  for (int i = 0; i < n_frames; ++i) frames.push_back({i, {}});
  return VideoTrack(w, h, std::move(frames));
}

// Independent per-frame re-evaluation: disc meets line iff the center-to-line
// distance is below the radius and the closest point lies in the image.
bool disc_meets_line(const Detection& d, const HomogeneousLine& l, double w, double h) {
  const double dist = std::abs(signed_distance(l, HomogeneousPoint(d.x, d.y)));
  if (dist >= d.r) return false;
  const Eigen::Vector2d foot = closest_point(l, {d.x, d.y});
  return foot.x() >= 0 && foot.x() <= w && foot.y() >= 0 && foot.y() <= h;
}

}  // namespace

TEST_CASE("track validation") {
  CHECK_THROWS_AS(VideoTrack(640, 480, {{0, {}}, {2, {}}}), FormatError);  // gap
  CHECK_THROWS_AS(VideoTrack(640, 480, {{1, {}}}), FormatError);           // not 0-based
  CHECK_THROWS_AS(VideoTrack(640, 480, {{0, {{10, 10, -1}}}}), FormatError);
  CHECK_THROWS_AS(VideoTrack(640, 480, {{0, {{-5, 10, 1}}}}), FormatError);
  CHECK_NOTHROW(VideoTrack(640, 480, {{0, {{10, 10, 2}}}, {1, {}}}));
}

TEST_CASE("line_barcode basics") {
  const auto none = line_barcode(empty_track(8), HomogeneousLine(0, 1, -10));
  CHECK(none.size() == 8);
  CHECK(none.popcount() == 0);
  CHECK(none.constant());

  auto track = empty_track(10);
  std::vector<FrameTrack> frames = track.frames();
  frames[5].detections.push_back({10, 10, 2});
  const VideoTrack t(640, 480, std::move(frames));
  const auto bc = line_barcode(t, line_through(HomogeneousPoint(10, 10),
                                               HomogeneousPoint(100, 40)));
  CHECK(bc.popcount() == 1);
  CHECK(bc[5]);
}

TEST_CASE("line_barcode matches the brute-force oracle on a simulator scene") {
  SceneConfig cfg = default_scene_config(MotionModel::Linear3D, 5);
  cfg.n_frames = 120;
  const Scene scene = generate_scene(cfg);
  Rng rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    const HomogeneousLine l(static_cast<double>(rng() % 1000) / 500.0 - 1.0,
                            static_cast<double>(rng() % 1000) / 500.0 - 1.0 + 1e-3,
                            static_cast<double>(rng() % 640) - 320.0);
    const auto bc = line_barcode(scene.track_B, l);
    for (int f = 0; f < cfg.n_frames; ++f) {
      bool expect = false;
      for (const auto& d : scene.track_B.frame(f).detections)
        expect = expect || disc_meets_line(d, l, cfg.width, cfg.height);
      CHECK(bc[f] == expect);
    }
  }
}

TEST_CASE("disc_barcode basics") {
  std::vector<FrameTrack> frames;
  for (int i = 0; i < 10; ++i) frames.push_back({i, {}});
  frames[2].detections.push_back({50, 50, 3});
  frames[7].detections.push_back({50, 50, 1});
  frames[4].detections.push_back({400, 400, 3});
  const VideoTrack t(640, 480, std::move(frames));

  const auto bc = disc_barcode(t, HomogeneousPoint(50, 50), 2);
  CHECK(bc.popcount() == 2);
  CHECK(bc[2]);
  CHECK(bc[7]);

  const auto far = disc_barcode(t, HomogeneousPoint(200, 100), 1e-9);
  CHECK(far.popcount() == 0);
}

TEST_CASE("disc_barcode matches per-frame distance oracle") {
  SceneConfig cfg = default_scene_config(MotionModel::Linear3D, 6);
  cfg.n_frames = 100;
  const Scene scene = generate_scene(cfg);
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const HomogeneousPoint p(static_cast<double>(rng() % 640),
                             static_cast<double>(rng() % 480));
    const double radius = 1.0 + static_cast<double>(rng() % 8);
    const auto bc = disc_barcode(scene.track_A, p, radius);
    for (int f = 0; f < cfg.n_frames; ++f) {
      bool expect = false;
      for (const auto& d : scene.track_A.frame(f).detections)
        expect = expect || std::hypot(d.x - p.x(), d.y - p.y()) < radius + d.r;
      CHECK(bc[f] == expect);
    }
  }
}

TEST_CASE("ncc") {
  const MotionBarcode a({1, 0, 1, 0});
  const MotionBarcode b({1, 0, 0, 0});
  CHECK(ncc(a, a) == doctest::Approx(1.0));
  CHECK(ncc(a, MotionBarcode({0, 1, 0, 1})) == doctest::Approx(-1.0));
  CHECK(ncc(a, b) == doctest::Approx(0.57735).epsilon(1e-4));
  CHECK_THROWS_AS(ncc(a, MotionBarcode({1, 1, 1, 1})), ConstantBarcode);
  CHECK_THROWS_AS(ncc(MotionBarcode({0, 0, 0, 0}), b), ConstantBarcode);
}
