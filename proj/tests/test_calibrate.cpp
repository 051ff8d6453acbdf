#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epiline/calibrate.hpp"
#include "epiline/sim.hpp"

using namespace epiline;

namespace {

// Exact epipolar line pair through a given A-image point.
LinePair gt_pair(const GroundTruth& gt, const HomogeneousPoint& p_A) {
  return {line_through(gt.e_A, p_A), gt.F.epipolar_line_in_B(p_A)};
}

LinePairCandidate gt_candidate(const GroundTruth& gt, const HomogeneousPoint& p_A,
                               double score) {
  auto [lA, lB] = gt_pair(gt, p_A);
  return LinePairCandidate{lA, lB, score, {0, 1, 2}};
}

PencilHomography gt_homography(const GroundTruth& gt) {
  const std::array<LinePair, 3> pairs = {{gt_pair(gt, HomogeneousPoint(100, 100)),
                                          gt_pair(gt, HomogeneousPoint(500, 150)),
                                          gt_pair(gt, HomogeneousPoint(320, 400))}};
  return fit_pencil_homography(pairs, gt.e_A, gt.e_B, gt.width, gt.height, gt.width,
                               gt.height);
}

}  // namespace

TEST_CASE("sample_hypothesis favors high scores") {
  SceneConfig cfg = default_scene_config(MotionModel::Linear3D, 2);
  const Scene scene = generate_scene(cfg);
  std::vector<LinePairCandidate> candidates = {
      gt_candidate(scene.gt, HomogeneousPoint(100, 100), 0.99),
      gt_candidate(scene.gt, HomogeneousPoint(500, 400), 1e-6)};
  Rng rng(123);
  int first_pair = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    const auto h = sample_hypothesis(candidates, rng);
    // the high-score candidate must be in every draw; order identifies it
    if (h.pair_1.score == 0.99 || h.pair_2.score == 0.99) ++first_pair;
  }
  CHECK(first_pair == trials);  // with weight ratio ~1e6 both draws include it
}

TEST_CASE("sample_hypothesis draw frequencies track scores") {
  // three candidates around distinct epipole constructions, weights 3:2:1
  SceneConfig cfg = default_scene_config(MotionModel::Linear3D, 2);
  const Scene scene = generate_scene(cfg);
  std::vector<LinePairCandidate> candidates = {
      gt_candidate(scene.gt, HomogeneousPoint(100, 100), 0.6),
      gt_candidate(scene.gt, HomogeneousPoint(500, 400), 0.4),
      gt_candidate(scene.gt, HomogeneousPoint(320, 40), 0.2)};
  Rng rng(5);
  int first_drawn_first = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    const auto h = sample_hypothesis(candidates, rng);
    if (h.pair_1.score == 0.6) ++first_drawn_first;
  }
  // P(first draw = candidate 0) = 0.5; chi-square at 1% ~ 2.58 sigma
  const double expect = trials * 0.5, sigma = std::sqrt(trials * 0.5 * 0.5);
  CHECK(std::abs(first_drawn_first - expect) < 3.0 * sigma);
}

TEST_CASE("parallel hypothesis lines are degenerate") {
  std::vector<LinePairCandidate> candidates = {
      {HomogeneousLine(0, 1, -100), HomogeneousLine(1, 0, -100), 0.9, {0, 1, 2}},
      {HomogeneousLine(0, 1, -200), HomogeneousLine(1, 0, -200), 0.9, {0, 1, 2}}};
  Rng rng(1);
  CHECK_THROWS_AS(sample_hypothesis(candidates, rng), DegenerateHypothesis);
}

TEST_CASE("ground-truth pairs intersect at the ground-truth epipoles") {
  SceneConfig cfg = default_scene_config(MotionModel::Linear3D, 4);
  const Scene scene = generate_scene(cfg);
  std::vector<LinePairCandidate> candidates = {
      gt_candidate(scene.gt, HomogeneousPoint(100, 100), 0.95),
      gt_candidate(scene.gt, HomogeneousPoint(500, 400), 0.95)};
  Rng rng(9);
  const auto h = sample_hypothesis(candidates, rng);
  CHECK(std::hypot(h.e_A.x() - scene.gt.e_A.x(), h.e_A.y() - scene.gt.e_A.y()) < 0.5);
  CHECK(std::hypot(h.e_B.x() - scene.gt.e_B.x(), h.e_B.y() - scene.gt.e_B.y()) < 0.5);
}

TEST_CASE("third_line with ground-truth epipoles returns an inlier pair") {
  SceneConfig cfg = default_scene_config(MotionModel::Linear3D, 4);
  const Scene scene = generate_scene(cfg);
  Rng rng(17);
  const auto [lA, lB, score] =
      third_line(scene.gt.e_A, scene.gt.e_B, scene.track_A, scene.track_B, rng);
  CHECK(score > 0.5);
  CHECK(area_inlier(lA, scene.gt.e_A, cfg.width, cfg.height));
  CHECK(area_inlier(lB, scene.gt.e_B, cfg.width, cfg.height));
  // the returned lines are exact pencil members of the hypothesized epipoles
  CHECK(std::abs(signed_distance(lA, scene.gt.e_A)) < 1e-6);
  CHECK(std::abs(signed_distance(lB, scene.gt.e_B)) < 1e-6);
}

TEST_CASE("third_line single corresponding detection") {
  // one moving object, very short clip: every frame has one detection per view
  SceneConfig cfg = default_scene_config(MotionModel::Linear3D, 12);
  cfg.n_objects = 1;
  cfg.n_frames = 40;
  cfg.sigma = 0.0;
  const Scene scene = generate_scene(cfg);
  Rng rng(3);
  const auto [lA, lB, score] =
      third_line(scene.gt.e_A, scene.gt.e_B, scene.track_A, scene.track_B, rng);
  (void)score;
  // with a single object the pair must join the same object's projections
  CHECK(area_inlier(lA, scene.gt.e_A, cfg.width, cfg.height));
  CHECK(area_inlier(lB, scene.gt.e_B, cfg.width, cfg.height));
}

TEST_CASE("third_line requires some detections") {
  std::vector<FrameTrack> fa, fb;
  for (int i = 0; i < 10; ++i) {
    fa.push_back({i, {}});
    fb.push_back({i, {}});
  }
  const VideoTrack tA(640, 480, std::move(fa)), tB(640, 480, std::move(fb));
  Rng rng(1);
  CHECK_THROWS_AS(third_line(HomogeneousPoint(-100, 200), HomogeneousPoint(700, 300),
                             tA, tB, rng),
                  EmptyFrame);
}

TEST_CASE("validate scores the ground-truth model highly") {
  SceneConfig cfg = default_scene_config(MotionModel::Linear3D, 4);
  const Scene scene = generate_scene(cfg);
  const auto H = gt_homography(scene.gt);
  Rng rng(21);
  const double s = validate(scene.gt.e_A, scene.gt.e_B, H, scene.track_A, scene.track_B,
                            10, rng);
  CHECK(s > 0.9);
}

TEST_CASE("validate starves without motion") {
  std::vector<FrameTrack> fa, fb;
  for (int i = 0; i < 10; ++i) {
    fa.push_back({i, {}});
    fb.push_back({i, {}});
  }
  const VideoTrack tA(640, 480, std::move(fa)), tB(640, 480, std::move(fb));
  SceneConfig cfg = default_scene_config(MotionModel::Linear3D, 4);
  const Scene scene = generate_scene(cfg);
  const auto H = gt_homography(scene.gt);
  Rng rng(2);
  CHECK_THROWS_AS(validate(scene.gt.e_A, scene.gt.e_B, H, tA, tB, 10, rng),
                  ValidationStarved);
}

TEST_CASE("ransac calibration reaches desk-scale accuracy") {
  SceneConfig cfg = default_scene_config(MotionModel::Linear3D, 31);
  const Scene scene = generate_scene(cfg);
  RansacParams params;
  params.seed = 1;
  MatchParams match;
  MatchStats mstats;
  RansacStats rstats;
  const auto model = ransac_calibrate(scene.track_A, scene.track_B, params, match,
                                      &mstats, &rstats);
  CHECK(rstats.iterations_run > 0);
  CHECK(model.validation_score > 0.7);
  const auto report = evaluate_model(model, scene.gt, 500);
  CHECK(report.sed_mean < 2.0);
}

TEST_CASE("ransac refuses unusable candidate sets") {
  // two candidates sharing the same A-line direction everywhere: every
  // hypothesis is degenerate, so no model can be validated
  std::vector<FrameTrack> fa, fb;
  for (int i = 0; i < 20; ++i) {
    fa.push_back({i, {{10.0 + i, 10.0, 2.0}}});
    fb.push_back({i, {{20.0 + i, 20.0, 2.0}}});
  }
  const VideoTrack tA(640, 480, std::move(fa)), tB(640, 480, std::move(fb));
  std::vector<LinePairCandidate> candidates = {
      {HomogeneousLine(0, 1, -100), HomogeneousLine(1, 0, -100), 0.95, {0, 1, 2}},
      {HomogeneousLine(0, 1, -200), HomogeneousLine(1, 0, -200), 0.95, {0, 1, 2}}};
  RansacParams params;
  params.iterations = 50;
  CHECK_THROWS_AS(ransac_calibrate(candidates, tA, tB, params), NoValidModel);
}
