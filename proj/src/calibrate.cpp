#include "epiline/calibrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <future>
#include <numbers>
#include <thread>
#include <vector>

namespace epiline {

namespace {

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int uniform_int(Rng& rng, int n) {
  return static_cast<int>(uniform01(rng) * n) % n;
}

int thread_budget() {
  if (const char* env = std::getenv("EPILINE_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

HomogeneousLine line_at_angle(const HomogeneousPoint& e, double theta) {
  const Eigen::Vector2d n(std::sin(theta), -std::cos(theta));
  return HomogeneousLine(n.x(), n.y(), -(n.x() * e.x() + n.y() * e.y()));
}

/// Uniform-in-angle line of the pencil around e restricted to lines crossing
/// the image rectangle. Directions substitute for angles at infinite e.
std::optional<HomogeneousLine> sample_pencil_line(const HomogeneousPoint& e, double w,
                                                  double h, Rng& rng) {
  if (e.infinite()) {
    const Eigen::Vector2d n(-e.y(), e.x());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    const Eigen::Vector2d corners[4] = {{0, 0}, {w, 0}, {0, h}, {w, h}};
    for (const auto& c : corners) {
      const double p = n.dot(c);
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
    const double offset = lo + uniform01(rng) * (hi - lo);
    return HomogeneousLine(n.x(), n.y(), -offset);
  }
  const bool inside = e.x() >= 0.0 && e.x() <= w && e.y() >= 0.0 && e.y() <= h;
  double theta;
  if (inside) {
    theta = uniform01(rng) * std::numbers::pi;
  } else {
    const Eigen::Vector2d center(w / 2.0, h / 2.0);
    const Eigen::Vector2d ec(e.x(), e.y());
    const double beta = std::atan2(center.y() - ec.y(), center.x() - ec.x());
    double lo = 0.0, hi = 0.0;
    const Eigen::Vector2d corners[4] = {{0, 0}, {w, 0}, {0, h}, {w, h}};
    for (const auto& c : corners) {
      double d = std::atan2(c.y() - ec.y(), c.x() - ec.x()) - beta;
      while (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
      while (d < -std::numbers::pi) d += 2.0 * std::numbers::pi;
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    theta = beta + lo + uniform01(rng) * (hi - lo);
  }
  HomogeneousLine l = line_at_angle(e, theta);
  if (!clip_to_rect(l, w, h)) return std::nullopt;
  return l;
}

bool matches_hypothesis_lines(const HomogeneousLine& l_A, const HomogeneousLine& l_B,
                              const Hypothesis* exclude) {
  if (!exclude) return false;
  return (line_angle(l_A, exclude->pair_1.l_A) < 1e-6 ||
          line_angle(l_A, exclude->pair_2.l_A) < 1e-6) ||
         (line_angle(l_B, exclude->pair_1.l_B) < 1e-6 ||
          line_angle(l_B, exclude->pair_2.l_B) < 1e-6);
}

}  // namespace

Hypothesis sample_hypothesis(std::span<const LinePairCandidate> candidates, Rng& rng) {
  if (candidates.size() < 2) throw InsufficientCandidates();
  double total = 0.0;
  for (const auto& c : candidates) total += std::max(c.score, 0.0);
  if (!(total > 0.0)) throw InsufficientCandidates("all candidate scores non-positive");

  const auto draw = [&](int skip) {
    double t = total;
    if (skip >= 0) t -= std::max(candidates[static_cast<std::size_t>(skip)].score, 0.0);
    double u = uniform01(rng) * t;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (static_cast<int>(i) == skip) continue;
      u -= std::max(candidates[i].score, 0.0);
      if (u <= 0.0) return static_cast<int>(i);
    }
    return skip == static_cast<int>(candidates.size()) - 1
               ? static_cast<int>(candidates.size()) - 2
               : static_cast<int>(candidates.size()) - 1;
  };

  const int i1 = draw(-1);
  const int i2 = draw(i1);
  const auto& c1 = candidates[static_cast<std::size_t>(i1)];
  const auto& c2 = candidates[static_cast<std::size_t>(i2)];

  const auto intersect_checked = [](const HomogeneousLine& a, const HomogeneousLine& b) {
    Eigen::Vector3d c = a.coeffs().cross(b.coeffs());
    const double n = c.norm();
    if (n < 1e-12) throw DegenerateHypothesis("identical hypothesis lines");
    c /= n;
    if (std::abs(c.z()) < 1e-8) throw DegenerateHypothesis();
    return HomogeneousPoint::from_homogeneous(c);
  };
  return Hypothesis{c1, c2, intersect_checked(c1.l_A, c2.l_A),
                    intersect_checked(c1.l_B, c2.l_B)};
}

std::tuple<HomogeneousLine, HomogeneousLine, double> third_line(
    const HomogeneousPoint& e_A, const HomogeneousPoint& e_B, const VideoTrack& video_A,
    const VideoTrack& video_B, Rng& rng, std::span<const LinePairCandidate> candidates,
    const Hypothesis* exclude) {
  const double wA = video_A.width(), hA = video_A.height();
  const double wB = video_B.width(), hB = video_B.height();

  for (const auto& c : candidates) {
    if (matches_hypothesis_lines(c.l_A, c.l_B, exclude)) continue;
    if (area_inlier(c.l_A, e_A, wA, hA) && area_inlier(c.l_B, e_B, wB, hB)) {
      // Snap to exact pencil members so the homography fit stays consistent.
      try {
        return {nearest_pencil_line(c.l_A, e_A, wA, hA),
                nearest_pencil_line(c.l_B, e_B, wB, hB), c.score};
      } catch (const std::runtime_error&) {
        continue;
      }
    }
  }

  const int n = video_A.n_frames();
  bool saw_nonempty = false;
  for (int attempt = 0; attempt < n; ++attempt) {
    const int s = uniform_int(rng, n);
    const auto& dets_A = video_A.frame(s).detections;
    const auto& dets_B = video_B.frame(s).detections;
    if (dets_A.empty() || dets_B.empty()) continue;  // EmptyFrame: resample
    saw_nonempty = true;

    std::vector<HomogeneousLine> T_A, T_B;
    std::vector<MotionBarcode> bc_A, bc_B;
    for (const Detection& d : dets_A) {
      try {
        T_A.push_back(line_through(HomogeneousPoint(d.x, d.y), e_A));
      } catch (const CoincidentPoints&) {
      }
    }
    for (const Detection& d : dets_B) {
      try {
        T_B.push_back(line_through(HomogeneousPoint(d.x, d.y), e_B));
      } catch (const CoincidentPoints&) {
      }
    }
    for (const auto& l : T_A) bc_A.push_back(line_barcode(video_A, l));
    for (const auto& l : T_B) bc_B.push_back(line_barcode(video_B, l));

    double best = -2.0;
    int bi = -1, bj = -1;
    for (std::size_t i = 0; i < T_A.size(); ++i) {
      if (bc_A[i].constant()) continue;
      for (std::size_t j = 0; j < T_B.size(); ++j) {
        if (bc_B[j].constant()) continue;
        if (matches_hypothesis_lines(T_A[i], T_B[j], exclude)) continue;
        const double s_ncc = ncc(bc_A[i], bc_B[j]);
        if (s_ncc > best) {
          best = s_ncc;
          bi = static_cast<int>(i);
          bj = static_cast<int>(j);
        }
      }
    }
    if (bi >= 0) return {T_A[static_cast<std::size_t>(bi)],
                         T_B[static_cast<std::size_t>(bj)], best};
  }
  if (saw_nonempty) throw NoBarcodeSignal();
  throw EmptyFrame();
}

double validate(const HomogeneousPoint& e_A, const HomogeneousPoint& e_B,
                const PencilHomography& H, const VideoTrack& video_A,
                const VideoTrack& video_B, int k, Rng& rng) {
  const double wA = video_A.width(), hA = video_A.height();
  double sum = 0.0;
  int collected = 0;
  const int max_attempts = 5 * k;
  for (int attempt = 0; attempt < max_attempts && collected < k; ++attempt) {
    const auto l_A = sample_pencil_line(e_A, wA, hA, rng);
    if (!l_A) continue;
    try {
      const HomogeneousLine l_B = H.map(*l_A);
      const MotionBarcode b_A = line_barcode(video_A, *l_A);
      const MotionBarcode b_B = line_barcode(video_B, l_B);
      sum += ncc(b_A, b_B);
      ++collected;
    } catch (const ConstantBarcode&) {
    } catch (const DegeneratePencil&) {
    } catch (const CoincidentPoints&) {
    }
  }
  if (collected * 2 < k) throw ValidationStarved();
  return sum / collected;
}

namespace {

struct IterationResult {
  double score;
  Hypothesis hyp;
  HomogeneousLine l_A3;
  HomogeneousLine l_B3;
  double score3;
  PencilHomography H;
};

std::optional<IterationResult> run_iteration(std::span<const LinePairCandidate> cands,
                                             const VideoTrack& A, const VideoTrack& B,
                                             const RansacParams& params, int iter) {
  Rng rng(derive_seed(params.seed, 0x100000ull + static_cast<std::uint64_t>(iter)));
  try {
    Hypothesis hyp = sample_hypothesis(cands, rng);
    auto [l_A3, l_B3, s3] = third_line(hyp.e_A, hyp.e_B, A, B, rng, cands, &hyp);
    const std::array<LinePair, 3> pairs = {
        LinePair{hyp.pair_1.l_A, hyp.pair_1.l_B},
        LinePair{hyp.pair_2.l_A, hyp.pair_2.l_B},
        LinePair{l_A3, l_B3},
    };
    PencilHomography H =
        fit_pencil_homography(pairs, hyp.e_A, hyp.e_B, A.width(), A.height(), B.width(),
                              B.height());
    const double score =
        validate(hyp.e_A, hyp.e_B, H, A, B, params.validation_lines, rng);
    return IterationResult{score, std::move(hyp), l_A3, l_B3, s3, std::move(H)};
  } catch (const std::runtime_error&) {
    return std::nullopt;
  }
}

}  // namespace

EpipolarModel ransac_calibrate(std::span<const LinePairCandidate> candidates,
                               const VideoTrack& video_A, const VideoTrack& video_B,
                               const RansacParams& params, RansacStats* stats) {
  if (params.iterations < 1) throw ConfigError("iterations must be >= 1");
  const int n_threads = thread_budget();

  std::optional<IterationResult> best;
  int ran = 0, failed = 0;
  const int block = std::max(1, n_threads) * 8;
  for (int start = 0; start < params.iterations; start += block) {
    const int end = std::min(params.iterations, start + block);
    std::vector<std::optional<IterationResult>> results(
        static_cast<std::size_t>(end - start));
    if (n_threads <= 1) {
      for (int i = start; i < end; ++i)
        results[static_cast<std::size_t>(i - start)] =
            run_iteration(candidates, video_A, video_B, params, i);
    } else {
      std::vector<std::future<void>> futs;
      std::atomic<int> next{start};
      for (int t = 0; t < n_threads; ++t) {
        futs.push_back(std::async(std::launch::async, [&] {
          for (int i = next.fetch_add(1); i < end; i = next.fetch_add(1))
            results[static_cast<std::size_t>(i - start)] =
                run_iteration(candidates, video_A, video_B, params, i);
        }));
      }
      for (auto& f : futs) f.get();
    }
    // deterministic reduction: score, then lower iteration index
    for (auto& r : results) {
      ++ran;
      if (!r) {
        ++failed;
        continue;
      }
      if (!best || r->score > best->score) best = std::move(r);
    }
    if (best && best->score > params.early_exit_score) break;
  }
  if (stats) {
    stats->iterations_run = ran;
    stats->failed_iterations = failed;
  }
  if (!best) throw NoValidModel();

  const std::vector<LinePair> pairs = {
      {best->hyp.pair_1.l_A, best->hyp.pair_1.l_B},
      {best->hyp.pair_2.l_A, best->hyp.pair_2.l_B},
      {best->l_A3, best->l_B3},
  };
  FundamentalMatrix F = assemble_fundamental(best->hyp.e_A, best->hyp.e_B, pairs);
  return EpipolarModel{
      best->hyp.e_A,
      best->hyp.e_B,
      std::move(best->H),
      std::move(F),
      best->score,
      {best->hyp.pair_1, best->hyp.pair_2,
       LinePairCandidate{best->l_A3, best->l_B3, best->score3, {-1, -1, -1}}},
  };
}

EpipolarModel ransac_calibrate(const VideoTrack& video_A, const VideoTrack& video_B,
                               const RansacParams& params, const MatchParams& match,
                               MatchStats* match_stats, RansacStats* stats) {
  const auto candidates =
      generate_candidates(video_A, video_B, match, params.seed, match_stats);
  return ransac_calibrate(candidates, video_A, video_B, params, stats);
}

}  // namespace epiline
