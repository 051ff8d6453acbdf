#pragma once

#include <optional>
#include <span>

#include "epiline/matching.hpp"

namespace epiline {

struct PlanarParams {
  double disc_radius = 5.0;
  double theta_planar = 0.9;
  double tau_e = 3.0;  // perpendicular-distance inlier threshold (px)
  int iterations = 500;
  bool perpendicular_test = false;  // default: area inlier measure
  std::uint64_t seed = 0;
};

/// Camera-A pixel matched to a candidate epipolar line in camera B via
/// disc-vs-line barcode correlation.
struct PointLineMatch {
  HomogeneousPoint p_A;
  HomogeneousLine l_B;
  double score = 0.0;
};

/// Best Lambda_B line for one recurring pixel, scored by disc-barcode NCC;
/// none when the best score falls below theta_planar. Equal scores keep the
/// smaller-index line.
std::optional<PointLineMatch> planar_candidate(const RecurringPixel& rp,
                                               const VideoTrack& video_A,
                                               const VideoTrack& video_B,
                                               const MatchParams& match,
                                               const PlanarParams& params);

std::vector<PointLineMatch> planar_candidates(const VideoTrack& video_A,
                                              const VideoTrack& video_B,
                                              const MatchParams& match,
                                              const PlanarParams& params);

/// Consensus vote for the off-plane epipole: RANSAC over line pairs, counting
/// lines that agree with the candidate intersection.
std::pair<HomogeneousPoint, int> planar_epipole(std::span<const PointLineMatch> matches,
                                                const PlanarParams& params, int width,
                                                int height);

}  // namespace epiline
