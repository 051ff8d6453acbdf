#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "epiline/barcode.hpp"
#include "epiline/geometry.hpp"
#include "epiline/rng.hpp"

namespace epiline {

struct MatchParams {
  double tau_p = 1.0;      // recurrence tolerance (px)
  double tau_l = 1.5;      // point-on-line tolerance (px)
  double theta_ncc = 0.9;  // candidate acceptance threshold
};

/// A camera-A pixel where foreground centroids were seen in >=2 frames,
/// i.e. two scene depths on one viewing ray.
struct RecurringPixel {
  HomogeneousPoint position;
  std::vector<std::pair<int, int>> occurrences;  // (frame, detection index)
};

/// Scored putative pair of corresponding epipolar lines.
struct LinePairCandidate {
  HomogeneousLine l_A;
  HomogeneousLine l_B;
  double score = 0.0;
  std::array<int, 3> support = {-1, -1, -1};  // frames (t_i, t_j, t_k)
};

struct MatchStats {
  long barcode_evaluations = 0;
  long recurring_pixels = 0;
  long candidate_lines_B = 0;
};

/// Maximal groups of detections in distinct frames mutually within tau_p,
/// groups of size >=2, sorted by descending size.
std::vector<RecurringPixel> find_recurring_pixels(const VideoTrack& video_A,
                                                  double tau_p);

/// Lambda_B: epipolar-line candidates in camera B from ordered detection pairs
/// at the recurring pixel's first two occurrence frames; with >=3 occurrences
/// a collinearity filter requires every occurrence frame to put a detection
/// within tau_l of the line.
std::vector<HomogeneousLine> candidate_lines_B(const RecurringPixel& rp,
                                               const VideoTrack& video_B,
                                               const MatchParams& params);

/// Finds a third frame with a B-detection on l_B, forms Lambda_A through the
/// recurring pixel, and keeps the best-NCC line if it clears theta_ncc.
/// Throws NoThirdFrame when no qualifying frame exists.
std::optional<LinePairCandidate> match_line_in_A(const HomogeneousLine& l_B,
                                                 const RecurringPixel& rp,
                                                 const VideoTrack& video_A,
                                                 const VideoTrack& video_B,
                                                 const MatchParams& params, Rng& rng,
                                                 MatchStats* stats = nullptr);

/// Full candidate generation: union over recurring pixels, deduplicated and
/// sorted by descending score. Throws InsufficientCandidates below 2.
std::vector<LinePairCandidate> generate_candidates(const VideoTrack& video_A,
                                                   const VideoTrack& video_B,
                                                   const MatchParams& params,
                                                   std::uint64_t seed,
                                                   MatchStats* stats = nullptr);

}  // namespace epiline
