#pragma once

#include <filesystem>
#include <string>

#include "epiline/planar.hpp"
#include "epiline/sim.hpp"

namespace epiline {

/// JSON Lines track format: a header record {"width","height","n_frames"}
/// followed by one record per frame {"frame", "detections":[{"x","y","r"}]}.
void write_track(const std::filesystem::path& path, const VideoTrack& track);
VideoTrack read_track(const std::filesystem::path& path);

/// Ground truth JSON: {"F":[9 row-major], "eA":[3], "eB":[3], ...}.
void write_ground_truth(const std::filesystem::path& path, const GroundTruth& gt);
GroundTruth read_ground_truth(const std::filesystem::path& path);

struct CalibrationResult {
  EpipolarModel model;
  std::vector<LinePairCandidate> candidates;
  MatchStats match_stats;
  RansacStats ransac_stats;
  double timing_seconds = 0.0;
};

std::string result_to_json(const CalibrationResult& result);
CalibrationResult result_from_json(const std::string& text);
void write_result(const std::filesystem::path& path, const CalibrationResult& result);
CalibrationResult read_result(const std::filesystem::path& path);

/// One CSV row matching the evaluation report columns; header is versioned.
std::string eval_report_csv(const EvalReport& report);

/// Side-by-side SVG of both image frames with epipolar-line pairs drawn in
/// matching colors.
void write_svg_overlay(const std::filesystem::path& path, const EpipolarModel& model,
                       std::span<const LinePairCandidate> candidates, int width_A,
                       int height_A, int width_B, int height_B);

SceneConfig read_scene_config(const std::filesystem::path& path);
void write_scene_config(const std::filesystem::path& path, const SceneConfig& cfg);

}  // namespace epiline
