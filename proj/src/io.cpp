#include "epiline/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace epiline {

namespace {

using nlohmann::json;

json point_to_json(const HomogeneousPoint& p) {
  return json::array({p.vec().x(), p.vec().y(), p.vec().z()});
}

HomogeneousPoint point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("point must be [x,y,z]");
  const Eigen::Vector3d v(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  if (v.z() == 0.0) return HomogeneousPoint::at_infinity(v.x(), v.y());
  return HomogeneousPoint::from_homogeneous(v);
}

json line_to_json(const HomogeneousLine& l) {
  return json::array({l.coeffs().x(), l.coeffs().y(), l.coeffs().z()});
}

HomogeneousLine line_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("line must be [a,b,c]");
  return HomogeneousLine::from_normalized(
      {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()});
}

json matrix3_to_json(const Eigen::Matrix3d& m) {
  json a = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  return a;
}

Eigen::Matrix3d matrix3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 9) throw FormatError("matrix must have 9 entries");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = j[static_cast<std::size_t>(3 * r + c)].get<double>();
  return m;
}

json camera_to_json(const Eigen::Matrix<double, 3, 4>& P) {
  json a = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) a.push_back(P(r, c));
  return a;
}

Eigen::Matrix<double, 3, 4> camera_from_json(const json& j) {
  if (!j.is_array() || j.size() != 12) throw FormatError("camera must have 12 entries");
  Eigen::Matrix<double, 3, 4> P;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) P(r, c) = j[static_cast<std::size_t>(4 * r + c)].get<double>();
  return P;
}

json candidate_to_json(const LinePairCandidate& c) {
  return json{{"lA", line_to_json(c.l_A)},
              {"lB", line_to_json(c.l_B)},
              {"score", c.score},
              {"support", c.support}};
}

LinePairCandidate candidate_from_json(const json& j) {
  LinePairCandidate c{line_from_json(j.at("lA")), line_from_json(j.at("lB")),
                      j.at("score").get<double>(), {-1, -1, -1}};
  if (j.contains("support")) {
    const auto& s = j["support"];
    for (std::size_t i = 0; i < 3 && i < s.size(); ++i)
      c.support[i] = s[i].get<int>();
  }
  return c;
}

json parse_or_throw(std::istream& in, const std::string& what) {
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw FormatError("malformed JSON in " + what);
  return j;
}

}  // namespace

void write_track(const std::filesystem::path& path, const VideoTrack& track) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << json{{"width", track.width()},
              {"height", track.height()},
              {"n_frames", track.n_frames()}}
             .dump()
      << "\n";
  for (const FrameTrack& f : track.frames()) {
    json dets = json::array();
    for (const Detection& d : f.detections)
      dets.push_back(json{{"x", d.x}, {"y", d.y}, {"r", d.r}});
    out << json{{"frame", f.frame_index}, {"detections", dets}}.dump() << "\n";
  }
}

VideoTrack read_track(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty track file");
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.contains("width") || !header.contains("height"))
    throw FormatError("missing track header");
  const int width = header.at("width").get<int>();
  const int height = header.at("height").get<int>();
  const int n_frames = header.value("n_frames", -1);

  std::vector<FrameTrack> frames;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded()) throw FormatError("malformed frame record");
    FrameTrack f{rec.at("frame").get<int>(), {}};
    for (const auto& d : rec.at("detections"))
      f.detections.push_back(
          {d.at("x").get<double>(), d.at("y").get<double>(), d.at("r").get<double>()});
    frames.push_back(std::move(f));
  }
  if (n_frames >= 0 && static_cast<int>(frames.size()) != n_frames)
    throw FormatError("frame count does not match header");
  return VideoTrack(width, height, std::move(frames));
}

void write_ground_truth(const std::filesystem::path& path, const GroundTruth& gt) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << json{{"F", matrix3_to_json(gt.F.matrix())},
              {"eA", point_to_json(gt.e_A)},
              {"eB", point_to_json(gt.e_B)},
              {"P_A", camera_to_json(gt.P_A)},
              {"P_B", camera_to_json(gt.P_B)},
              {"width", gt.width},
              {"height", gt.height},
              {"volume", gt.volume}}
             .dump(2)
      << "\n";
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  json j = parse_or_throw(in, path.string());
  return GroundTruth{FundamentalMatrix::from_normalized(matrix3_from_json(j.at("F"))),
                     point_from_json(j.at("eA")),
                     point_from_json(j.at("eB")),
                     camera_from_json(j.at("P_A")),
                     camera_from_json(j.at("P_B")),
                     j.at("width").get<int>(),
                     j.at("height").get<int>(),
                     j.at("volume").get<double>()};
}

std::string result_to_json(const CalibrationResult& result) {
  const EpipolarModel& m = result.model;
  json pairs = json::array();
  for (const auto& p : m.defining_pairs) pairs.push_back(candidate_to_json(p));
  json cands = json::array();
  for (const auto& c : result.candidates) cands.push_back(candidate_to_json(c));
  const Eigen::Matrix2d& h = m.homography.matrix();
  json j{
      {"F", matrix3_to_json(m.F.matrix())},
      {"eA", point_to_json(m.e_A)},
      {"eB", point_to_json(m.e_B)},
      {"homography",
       {{"matrix", json::array({h(0, 0), h(0, 1), h(1, 0), h(1, 1)})},
        {"refA", line_to_json(m.homography.reference_A())},
        {"refB", line_to_json(m.homography.reference_B())}}},
      {"validation_score", m.validation_score},
      {"defining_pairs", pairs},
      {"candidates", cands},
      {"stats",
       {{"barcode_evaluations", result.match_stats.barcode_evaluations},
        {"recurring_pixels", result.match_stats.recurring_pixels},
        {"candidate_lines_B", result.match_stats.candidate_lines_B},
        {"iterations_run", result.ransac_stats.iterations_run},
        {"failed_iterations", result.ransac_stats.failed_iterations}}},
      {"timing_seconds", result.timing_seconds},
  };
  return j.dump(2) + "\n";
}

CalibrationResult result_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw FormatError("malformed result JSON");
  const HomogeneousPoint e_A = point_from_json(j.at("eA"));
  const HomogeneousPoint e_B = point_from_json(j.at("eB"));
  const auto& hj = j.at("homography");
  Eigen::Matrix2d h;
  h << hj.at("matrix")[0].get<double>(), hj.at("matrix")[1].get<double>(),
      hj.at("matrix")[2].get<double>(), hj.at("matrix")[3].get<double>();
  PencilHomography H(h, e_A, e_B, line_from_json(hj.at("refA")),
                     line_from_json(hj.at("refB")));
  const auto& dp = j.at("defining_pairs");
  if (dp.size() != 3) throw FormatError("expected 3 defining pairs");
  EpipolarModel model{e_A,
                      e_B,
                      std::move(H),
                      FundamentalMatrix::from_normalized(matrix3_from_json(j.at("F"))),
                      j.at("validation_score").get<double>(),
                      {candidate_from_json(dp[0]), candidate_from_json(dp[1]),
                       candidate_from_json(dp[2])}};
  CalibrationResult result{std::move(model), {}, {}, {}, 0.0};
  for (const auto& c : j.value("candidates", json::array()))
    result.candidates.push_back(candidate_from_json(c));
  result.timing_seconds = j.value("timing_seconds", 0.0);
  return result;
}

void write_result(const std::filesystem::path& path, const CalibrationResult& result) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << result_to_json(result);
}

CalibrationResult read_result(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return result_from_json(ss.str());
}

std::string eval_report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "format,sed_mean_px,e_A_error_px,e_B_error_px,inlier_rate,n_samples\n";
  out << "epiline-eval-1," << report.sed_mean << "," << report.e_A_error_px << ","
      << report.e_B_error_px << "," << report.inlier_rate << "," << report.n_samples
      << "\n";
  return out.str();
}

void write_svg_overlay(const std::filesystem::path& path, const EpipolarModel& model,
                       std::span<const LinePairCandidate> candidates, int width_A,
                       int height_A, int width_B, int height_B) {
  static const char* kPalette[] = {"#e6194b", "#3cb44b", "#4363d8", "#f58231",
                                   "#911eb4", "#46f0f0", "#f032e6", "#bcf60c",
                                   "#fabebe", "#008080"};
  const int gap = 24;
  const int total_w = width_A + gap + width_B;
  const int total_h = std::max(height_A, height_B);
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << total_w
      << "\" height=\"" << total_h << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << width_A << "\" height=\"" << height_A
      << "\" fill=\"#f8f8f8\" stroke=\"#333\"/>\n";
  out << "<rect x=\"" << width_A + gap << "\" y=\"0\" width=\"" << width_B
      << "\" height=\"" << height_B << "\" fill=\"#f8f8f8\" stroke=\"#333\"/>\n";

  const auto draw_pair = [&](const LinePairCandidate& c, const char* color, int sw) {
    if (const auto seg = clip_to_rect(c.l_A, width_A, height_A)) {
      out << "<line x1=\"" << seg->first.x() << "\" y1=\"" << seg->first.y()
          << "\" x2=\"" << seg->second.x() << "\" y2=\"" << seg->second.y()
          << "\" stroke=\"" << color << "\" stroke-width=\"" << sw << "\"/>\n";
    }
    if (const auto seg = clip_to_rect(c.l_B, width_B, height_B)) {
      out << "<line x1=\"" << seg->first.x() + width_A + gap << "\" y1=\""
          << seg->first.y() << "\" x2=\"" << seg->second.x() + width_A + gap
          << "\" y2=\"" << seg->second.y() << "\" stroke=\"" << color
          << "\" stroke-width=\"" << sw << "\"/>\n";
    }
  };

  std::size_t color_idx = 0;
  for (const auto& c : model.defining_pairs) draw_pair(c, kPalette[color_idx++ % 10], 3);
  for (std::size_t i = 0; i < candidates.size() && i < 20; ++i)
    draw_pair(candidates[i], kPalette[color_idx++ % 10], 1);
  out << "</svg>\n";
}

SceneConfig read_scene_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  json j = parse_or_throw(in, path.string());

  MotionModel motion = MotionModel::Linear3D;
  const std::string m = j.value("motion", "linear-3d");
  if (m == "linear-3d")
    motion = MotionModel::Linear3D;
  else if (m == "piecewise-linear-3d")
    motion = MotionModel::PiecewiseLinear3D;
  else if (m == "planar")
    motion = MotionModel::Planar;
  else
    throw FormatError("unknown motion model: " + m);

  SceneConfig cfg = default_scene_config(motion, j.value("seed", 0ull));
  cfg.width = j.value("width", cfg.width);
  cfg.height = j.value("height", cfg.height);
  cfg.n_frames = j.value("n_frames", cfg.n_frames);
  cfg.n_objects = j.value("n_objects", cfg.n_objects);
  cfg.sigma = j.value("sigma", cfg.sigma);
  cfg.volume = j.value("volume", cfg.volume);
  if (j.contains("radius")) {
    cfg.radius_min = j["radius"][0].get<double>();
    cfg.radius_max = j["radius"][1].get<double>();
  }
  if (j.contains("P_A")) cfg.P_A = camera_from_json(j["P_A"]);
  if (j.contains("P_B")) cfg.P_B = camera_from_json(j["P_B"]);
  return cfg;
}

void write_scene_config(const std::filesystem::path& path, const SceneConfig& cfg) {
  const char* motion = cfg.motion == MotionModel::Linear3D ? "linear-3d"
                       : cfg.motion == MotionModel::PiecewiseLinear3D
                           ? "piecewise-linear-3d"
                           : "planar";
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << json{{"width", cfg.width},
              {"height", cfg.height},
              {"n_frames", cfg.n_frames},
              {"n_objects", cfg.n_objects},
              {"radius", json::array({cfg.radius_min, cfg.radius_max})},
              {"motion", motion},
              {"sigma", cfg.sigma},
              {"volume", cfg.volume},
              {"seed", cfg.seed},
              {"P_A", camera_to_json(cfg.P_A)},
              {"P_B", camera_to_json(cfg.P_B)}}
             .dump(2)
      << "\n";
}

}  // namespace epiline
