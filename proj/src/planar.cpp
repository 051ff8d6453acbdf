#include "epiline/planar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace epiline {

namespace {

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int uniform_int(Rng& rng, int n) {
  return static_cast<int>(uniform01(rng) * n) % n;
}

double inlier_residual(const HomogeneousLine& l, const HomogeneousPoint& e,
                       const PlanarParams& params, int width, int height, bool* ok) {
  if (params.perpendicular_test) {
    if (e.infinite()) {
      *ok = false;
      return 0.0;
    }
    const double d = std::abs(signed_distance(l, e));
    *ok = d < params.tau_e;
    return d;
  }
  try {
    const HomogeneousLine ref = nearest_pencil_line(l, e, width, height);
    const double a = area_measure(l, ref, width, height);
    *ok = a < 3.0 * width;
    return a;
  } catch (const OutOfFrame&) {
    *ok = false;
    return std::numeric_limits<double>::infinity();
  } catch (const CoincidentPoints&) {
    *ok = true;
    return 0.0;
  }
}

}  // namespace

std::optional<PointLineMatch> planar_candidate(const RecurringPixel& rp,
                                               const VideoTrack& video_A,
                                               const VideoTrack& video_B,
                                               const MatchParams& match,
                                               const PlanarParams& params) {
  const auto lambda_B = candidate_lines_B(rp, video_B, match);
  if (lambda_B.empty()) return std::nullopt;

  MotionBarcode disc = disc_barcode(video_A, rp.position, params.disc_radius);
  if (disc.constant()) return std::nullopt;

  double best = -2.0;
  std::optional<HomogeneousLine> best_line;
  for (const auto& l : lambda_B) {
    const MotionBarcode b = line_barcode(video_B, l);
    if (b.constant()) continue;
    const double s = ncc(disc, b);
    if (s > best) {  // ties keep the earlier (smaller-index) line
      best = s;
      best_line = l;
    }
  }
  if (!best_line || best < params.theta_planar) return std::nullopt;
  return PointLineMatch{rp.position, *best_line, best};
}

std::vector<PointLineMatch> planar_candidates(const VideoTrack& video_A,
                                              const VideoTrack& video_B,
                                              const MatchParams& match,
                                              const PlanarParams& params) {
  std::vector<PointLineMatch> out;
  for (const auto& rp : find_recurring_pixels(video_A, match.tau_p)) {
    if (auto m = planar_candidate(rp, video_A, video_B, match, params)) out.push_back(*m);
  }
  return out;
}

std::pair<HomogeneousPoint, int> planar_epipole(std::span<const PointLineMatch> matches,
                                                const PlanarParams& params, int width,
                                                int height) {
  if (matches.size() < 2) throw InsufficientLines();
  const int n = static_cast<int>(matches.size());
  Rng rng(derive_seed(params.seed, 0x9147));

  int best_count = -1;
  double best_residual = std::numeric_limits<double>::infinity();
  std::optional<HomogeneousPoint> best_e;

  for (int iter = 0; iter < params.iterations; ++iter) {
    const int i = uniform_int(rng, n);
    int j = uniform_int(rng, n - 1);
    if (j >= i) ++j;
    HomogeneousPoint e(0, 0);
    try {
      e = intersect(matches[static_cast<std::size_t>(i)].l_B,
                    matches[static_cast<std::size_t>(j)].l_B);
    } catch (const IdenticalLines&) {
      continue;
    }
    int count = 0;
    double residual_sum = 0.0;
    for (const auto& m : matches) {
      bool ok = false;
      const double r = inlier_residual(m.l_B, e, params, width, height, &ok);
      if (ok) {
        ++count;
        residual_sum += r;
      }
    }
    const double mean_res = count > 0 ? residual_sum / count
                                      : std::numeric_limits<double>::infinity();
    if (count > best_count || (count == best_count && mean_res < best_residual)) {
      best_count = count;
      best_residual = mean_res;
      best_e = e;
    }
  }
  if (!best_e || best_count < 0) throw InsufficientLines("no finite intersection");
  return {*best_e, best_count};
}

}  // namespace epiline
