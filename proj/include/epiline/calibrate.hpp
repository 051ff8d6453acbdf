#pragma once

#include <optional>
#include <span>
#include <tuple>

#include "epiline/matching.hpp"

namespace epiline {

struct RansacParams {
  int iterations = 500;
  int validation_lines = 10;
  double early_exit_score = 0.95;
  int refine_iterations = 100;
  std::uint64_t seed = 0;
};

struct EpipolarModel {
  HomogeneousPoint e_A;
  HomogeneousPoint e_B;
  PencilHomography homography;
  FundamentalMatrix F;
  double validation_score = 0.0;
  std::array<LinePairCandidate, 3> defining_pairs;
};

struct Hypothesis {
  LinePairCandidate pair_1;
  LinePairCandidate pair_2;
  HomogeneousPoint e_A;
  HomogeneousPoint e_B;
};

struct RansacStats {
  int degenerate_hypotheses = 0;
  int failed_iterations = 0;
  int iterations_run = 0;
};

/// Draws two distinct candidate pairs with probability proportional to score
/// and intersects them into epipole hypotheses.
Hypothesis sample_hypothesis(std::span<const LinePairCandidate> candidates, Rng& rng);

/// Third epipolar-line correspondence through the hypothesized epipoles: a
/// pre-existing inlier candidate when available, else the best barcode match
/// among detection-to-epipole lines of a random frame.
std::tuple<HomogeneousLine, HomogeneousLine, double> third_line(
    const HomogeneousPoint& e_A, const HomogeneousPoint& e_B, const VideoTrack& video_A,
    const VideoTrack& video_B, Rng& rng,
    std::span<const LinePairCandidate> candidates = {},
    const Hypothesis* exclude = nullptr);

/// Mean barcode NCC over k pencil lines sampled uniformly in angle among
/// lines hitting image A, mapped through H.
double validate(const HomogeneousPoint& e_A, const HomogeneousPoint& e_B,
                const PencilHomography& H, const VideoTrack& video_A,
                const VideoTrack& video_B, int k, Rng& rng);

EpipolarModel ransac_calibrate(const VideoTrack& video_A, const VideoTrack& video_B,
                               const RansacParams& params, const MatchParams& match,
                               MatchStats* match_stats = nullptr,
                               RansacStats* stats = nullptr);

/// Same search given precomputed candidates.
EpipolarModel ransac_calibrate(std::span<const LinePairCandidate> candidates,
                               const VideoTrack& video_A, const VideoTrack& video_B,
                               const RansacParams& params, RansacStats* stats = nullptr);

}  // namespace epiline
