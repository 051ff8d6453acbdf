#pragma once

#include <span>
#include <utility>

#include "epiline/calibrate.hpp"

namespace epiline {

/// Planar subdivision induced by a set of lines; vertices are pairwise
/// intersections, kept per line in traversal order.
class LineArrangement {
 public:
  explicit LineArrangement(std::span<const HomogeneousLine> lines);

  struct Vertex {
    int i;  // i < j
    int j;
    Eigen::Vector2d p;
  };

  const std::vector<HomogeneousLine>& lines() const { return lines_; }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  /// Indices into vertices(), sorted by position along line i.
  const std::vector<int>& vertices_on_line(int i) const {
    return on_line_[static_cast<std::size_t>(i)];
  }
  /// Up to 4 arrangement-adjacent vertices of vertex v.
  std::vector<int> neighbors(int v) const;

 private:
  std::vector<HomogeneousLine> lines_;
  std::vector<Vertex> vertices_;
  std::vector<std::vector<int>> on_line_;
  std::vector<std::vector<int>> rank_;  // position of vertex within on_line_
};

struct L1Stats {
  int vertex_visits = 0;
  long coefficient_additions = 0;
};

/// Keeps candidate pairs whose lines both pass the area inlier test against
/// the pencils through the estimated epipoles.
std::vector<LinePairCandidate> classify_inliers(
    std::span<const LinePairCandidate> candidates, const HomogeneousPoint& e_A,
    const HomogeneousPoint& e_B, double width_A, double height_A, double width_B,
    double height_B);

/// Least-squares point minimizing the sum of squared line distances.
HomogeneousPoint l2_epipole(std::span<const HomogeneousLine> lines);

/// Exhaustive scan of all pairwise intersections; the independent oracle for
/// the iterative solver. Ties broken by lexicographically smallest (i, j).
std::pair<HomogeneousPoint, double> l1_epipole_brute(
    std::span<const HomogeneousLine> lines);

/// Arrangement-vertex descent with cached pos/neg coefficient sums.
std::pair<HomogeneousPoint, double> l1_epipole_iterative(
    std::span<const HomogeneousLine> lines, Rng& rng, L1Stats* stats = nullptr);

/// L2 and L1 epipole refinement followed by three-frame RANSAC re-estimation;
/// returns the best-scoring of {initial, L2, L1} variants.
EpipolarModel refine_model(const EpipolarModel& initial,
                           std::span<const LinePairCandidate> candidates,
                           const VideoTrack& video_A, const VideoTrack& video_B,
                           const RansacParams& params);

/// Fits homography + F for fixed epipoles by sampling three frames per RANSAC
/// iteration and taking the best barcode-matched detection-to-epipole line
/// pair in each.
EpipolarModel reestimate_with_epipoles(const HomogeneousPoint& e_A,
                                       const HomogeneousPoint& e_B,
                                       const VideoTrack& video_A,
                                       const VideoTrack& video_B,
                                       const RansacParams& params,
                                       std::uint64_t stream);

}  // namespace epiline
