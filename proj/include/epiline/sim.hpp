#pragma once

#include <span>

#include "epiline/calibrate.hpp"

namespace epiline {

enum class MotionModel { Linear3D, PiecewiseLinear3D, Planar };

/// Synthetic two-camera scene: spheres moving in a world box observed by two
/// stationary projective cameras.
struct SceneConfig {
  int width = 640;
  int height = 480;
  int n_frames = 500;
  int n_objects = 8;
  double radius_min = 0.06;  // world units
  double radius_max = 0.14;
  MotionModel motion = MotionModel::Linear3D;
  Eigen::Matrix<double, 3, 4> P_A = Eigen::Matrix<double, 3, 4>::Zero();
  Eigen::Matrix<double, 3, 4> P_B = Eigen::Matrix<double, 3, 4>::Zero();
  double sigma = 0.3;  // centroid jitter (px)
  double volume = 2.0; // half extent of the motion box
  std::uint64_t seed = 0;
};

/// Projection matrix for a camera at center looking at the origin.
Eigen::Matrix<double, 3, 4> make_camera(const Eigen::Vector3d& center, double focal,
                                        double width, double height);

/// Default two-camera rig for the given mode; cameras and volume sized so the
/// motion stays inside both images.
SceneConfig default_scene_config(MotionModel motion = MotionModel::Linear3D,
                                 std::uint64_t seed = 0);

Eigen::Vector3d camera_center(const Eigen::Matrix<double, 3, 4>& P);

struct GroundTruth {
  FundamentalMatrix F;
  HomogeneousPoint e_A;
  HomogeneousPoint e_B;
  Eigen::Matrix<double, 3, 4> P_A;
  Eigen::Matrix<double, 3, 4> P_B;
  int width = 0;
  int height = 0;
  double volume = 0.0;

  /// Exact correspondence with both projections inside the images.
  std::pair<HomogeneousPoint, HomogeneousPoint> sample_correspondence(Rng& rng) const;
};

GroundTruth ground_truth_from_cameras(const Eigen::Matrix<double, 3, 4>& P_A,
                                      const Eigen::Matrix<double, 3, 4>& P_B, int width,
                                      int height, double volume);

struct Scene {
  VideoTrack track_A;
  VideoTrack track_B;
  GroundTruth gt;
};

Scene generate_scene(const SceneConfig& cfg);

struct EvalReport {
  double sed_mean = 0.0;
  double e_A_error_px = -1.0;  // -1 when a side is at infinity
  double e_B_error_px = -1.0;
  double inlier_rate = -1.0;  // -1 when no candidates supplied
  int n_samples = 0;
};

EvalReport evaluate_model(const EpipolarModel& model, const GroundTruth& gt,
                          int n_samples,
                          std::span<const LinePairCandidate> candidates = {},
                          std::uint64_t seed = 0);

}  // namespace epiline
