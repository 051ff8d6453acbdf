#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epiline/refine.hpp"
#include "epiline/sim.hpp"

using namespace epiline;

namespace {

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(Rng& rng, double lo, double hi) { return lo + uniform01(rng) * (hi - lo); }

std::vector<HomogeneousLine> random_lines(Rng& rng, int n) {
  std::vector<HomogeneousLine> lines;
  for (int i = 0; i < n; ++i) {
    const double theta = uniform(rng, 0, M_PI);
    lines.push_back(HomogeneousLine(std::cos(theta), std::sin(theta),
                                    uniform(rng, -300, 300)));
  }
  return lines;
}

double direct_loss(std::span<const HomogeneousLine> lines, const HomogeneousPoint& p) {
  double s = 0.0;
  for (const auto& l : lines) s += std::abs(l.coeffs().dot(p.vec()));
  return s;
}

}  // namespace

TEST_CASE("arrangement structure") {
  const std::vector<HomogeneousLine> lines = {HomogeneousLine(1, 0, 0),
                                              HomogeneousLine(0, 1, 0),
                                              HomogeneousLine(1, 1, -10)};
  const LineArrangement arr(lines);
  CHECK(arr.lines().size() == 3);
  CHECK(arr.vertices().size() == 3);
  for (std::size_t v = 0; v < arr.vertices().size(); ++v) {
    const auto nb = arr.neighbors(static_cast<int>(v));
    CHECK(nb.size() >= 2);
    CHECK(nb.size() <= 4);
  }
}

TEST_CASE("near-duplicate lines are merged with multiplicity") {
  const std::vector<HomogeneousLine> lines = {HomogeneousLine(1, 0, -5),
                                              HomogeneousLine(1, 1e-10, -5),
                                              HomogeneousLine(0, 1, -5)};
  const LineArrangement arr(lines);
  CHECK(arr.lines().size() == 2);
  // the merged line still counts twice in the loss
  Rng rng(1);
  const auto [p, loss] = l1_epipole_iterative(lines, rng);
  CHECK(p.x() == doctest::Approx(5.0));
  CHECK(p.y() == doctest::Approx(5.0));
  CHECK(loss == doctest::Approx(0.0));
}

TEST_CASE("l2_epipole") {
  const std::vector<HomogeneousLine> axes = {HomogeneousLine(1, 0, 0),
                                             HomogeneousLine(0, 1, 0)};
  const auto o = l2_epipole(axes);
  CHECK(std::hypot(o.x(), o.y()) < 1e-12);

  // k concurrent lines through (3,4)
  std::vector<HomogeneousLine> conc;
  const HomogeneousPoint c(3, 4);
  for (double t : {0.1, 0.7, 1.3, 2.2, 2.9})
    conc.push_back(HomogeneousLine(std::cos(t), std::sin(t),
                                   -(3 * std::cos(t) + 4 * std::sin(t))));
  const auto p = l2_epipole(conc);
  CHECK(p.x() == doctest::Approx(3.0));
  CHECK(p.y() == doctest::Approx(4.0));
}

TEST_CASE("l2_epipole matches an independent normal-equation oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const auto lines = random_lines(rng, 20);
    const auto p = l2_epipole(lines);
    // independent closed-form: minimize sum (a x + b y + c)^2 directly
    Eigen::Matrix2d AtA = Eigen::Matrix2d::Zero();
    Eigen::Vector2d Atb = Eigen::Vector2d::Zero();
    for (const auto& l : lines) {
      const Eigen::Vector2d n = l.coeffs().head<2>();
      AtA += n * n.transpose();
      Atb -= l.coeffs().z() * n;
    }
    const Eigen::Vector2d x = AtA.ldlt().solve(Atb);
    CHECK(std::hypot(p.x() - x.x(), p.y() - x.y()) < 1e-9);
  }
}

TEST_CASE("l1 brute: concurrent lines and triangle altitude") {
  std::vector<HomogeneousLine> conc;
  for (double t : {0.2, 1.1, 2.4})
    conc.push_back(HomogeneousLine(std::cos(t), std::sin(t),
                                   -(3 * std::cos(t) + 4 * std::sin(t))));
  const auto [p, loss] = l1_epipole_brute(conc);
  CHECK(loss == doctest::Approx(0.0));
  CHECK(p.x() == doctest::Approx(3.0));
  CHECK(p.y() == doctest::Approx(4.0));

  // equilateral triangle with side s: interior distance sum equals the
  // altitude s*sqrt(3)/2, attained on the boundary including each corner
  const double s = 10.0;
  const HomogeneousPoint a(0, 0), b(s, 0), c(s / 2, s * std::sqrt(3) / 2);
  const std::vector<HomogeneousLine> tri = {line_through(a, b), line_through(b, c),
                                            line_through(c, a)};
  const auto [v, tl] = l1_epipole_brute(tri);
  (void)v;
  CHECK(tl == doctest::Approx(s * std::sqrt(3) / 2));
}

TEST_CASE("iterative solver equals the brute oracle") {
  Rng seeds(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 3 + static_cast<int>(seeds() % 28);
    Rng rng(seeds());
    const auto lines = random_lines(rng, n);
    const auto [pb, lb] = l1_epipole_brute(lines);
    L1Stats stats;
    Rng rng2(seeds());
    const auto [pi, li] = l1_epipole_iterative(lines, rng2, &stats);
    CHECK(std::abs(lb - li) < 1e-9);
    CHECK(stats.vertex_visits <= n * n);
    // cached-sum evaluation agrees with the direct sum at the optimum
    CHECK(std::abs(direct_loss(lines, pi) - li) < 1e-9);
  }
}

TEST_CASE("iterative solver per-step cost is bounded") {
  Rng rng(7);
  const auto lines = random_lines(rng, 40);
  L1Stats stats;
  Rng rng2(8);
  l1_epipole_iterative(lines, rng2, &stats);
  REQUIRE(stats.vertex_visits > 0);
  // updating the cached coefficient sums costs O(1) additions per move
  CHECK(stats.coefficient_additions <= 16L * stats.vertex_visits);
}

TEST_CASE("l2_epipole rejects a rank-deficient system") {
  const std::vector<HomogeneousLine> parallel = {HomogeneousLine(0, 1, -10),
                                                 HomogeneousLine(0, 1, -20),
                                                 HomogeneousLine(0, 1, -30)};
  CHECK_THROWS_AS(l2_epipole(parallel), SingularNormalEquations);
}

TEST_CASE("l1 brute needs a finite vertex") {
  const std::vector<HomogeneousLine> parallel = {HomogeneousLine(0, 1, -10),
                                                 HomogeneousLine(0, 1, -20)};
  CHECK_THROWS_AS(l1_epipole_brute(parallel), NoFiniteVertex);
}

TEST_CASE("classify_inliers keeps true epipolar pairs") {
  SceneConfig cfg = default_scene_config(MotionModel::Linear3D, 13);
  const Scene scene = generate_scene(cfg);
  std::vector<LinePairCandidate> candidates;
  // two exact pairs and one far-off pair
  for (double x : {100.0, 400.0}) {
    const HomogeneousPoint p(x, 200);
    candidates.push_back({line_through(scene.gt.e_A, p),
                          scene.gt.F.epipolar_line_in_B(p), 0.95, {0, 1, 2}});
  }
  candidates.push_back({HomogeneousLine(1, 0.5, -100), HomogeneousLine(0.3, 1, -50),
                        0.95, {0, 1, 2}});
  const auto inl = classify_inliers(candidates, scene.gt.e_A, scene.gt.e_B, cfg.width,
                                    cfg.height, cfg.width, cfg.height);
  CHECK(inl.size() == 2);
}

TEST_CASE("refine_model never lowers the validation score") {
  SceneConfig cfg = default_scene_config(MotionModel::Linear3D, 57);
  const Scene scene = generate_scene(cfg);
  MatchParams match;
  RansacParams params;
  params.seed = 3;
  MatchStats mstats;
  const auto candidates = generate_candidates(scene.track_A, scene.track_B, match, 3,
                                              &mstats);
  const auto initial = ransac_calibrate(candidates, scene.track_A, scene.track_B, params);
  const auto refined = refine_model(initial, candidates, scene.track_A, scene.track_B,
                                    params);
  CHECK(refined.validation_score >= initial.validation_score);
  const auto r0 = evaluate_model(initial, scene.gt, 500);
  const auto r1 = evaluate_model(refined, scene.gt, 500);
  CHECK(r1.sed_mean < 2.0);
  CHECK(r0.sed_mean < 10.0);
}
