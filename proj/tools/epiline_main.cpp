#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "epiline/io.hpp"
#include "epiline/refine.hpp"

namespace fs = std::filesystem;
using namespace epiline;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::string track_A, track_B;
  std::string result_path, gt_path;
  std::string mode = "standard";
  bool svg = false;
  int n_samples = 500;
  std::uint64_t seed = 0;
  bool seed_set = false;
  MatchParams match;
  PlanarParams planar;
  RansacParams ransac;
};

int run_simulate(const CliOptions& opt) {
  SceneConfig cfg = read_scene_config(opt.config_path);
  if (opt.seed_set) cfg.seed = opt.seed;
  const Scene scene = generate_scene(cfg);
  fs::create_directories(opt.out_dir);
  write_track(fs::path(opt.out_dir) / "track_A.jsonl", scene.track_A);
  write_track(fs::path(opt.out_dir) / "track_B.jsonl", scene.track_B);
  write_ground_truth(fs::path(opt.out_dir) / "ground_truth.json", scene.gt);
  std::cout << "wrote track_A.jsonl, track_B.jsonl, ground_truth.json to "
            << opt.out_dir << "\n";
  return 0;
}

int run_calibrate(CliOptions& opt) {
  const VideoTrack A = read_track(opt.track_A);
  const VideoTrack B = read_track(opt.track_B);
  if (A.n_frames() != B.n_frames())
    throw SyncError("track lengths differ: " + std::to_string(A.n_frames()) + " vs " +
                    std::to_string(B.n_frames()));

  fs::create_directories(opt.out_dir);
  opt.ransac.seed = opt.seed;
  opt.planar.seed = opt.seed;

  if (opt.mode == "planar") {
    const auto matches = planar_candidates(A, B, opt.match, opt.planar);
    const auto [e_B, inliers] =
        planar_epipole(matches, opt.planar, B.width(), B.height());
    nlohmann::json lines = nlohmann::json::array();
    for (const auto& m : matches)
      lines.push_back(nlohmann::json{
          {"pA", {m.p_A.x(), m.p_A.y()}},
          {"lB", {m.l_B.coeffs().x(), m.l_B.coeffs().y(), m.l_B.coeffs().z()}},
          {"score", m.score}});
    nlohmann::json j{{"eB", {e_B.vec().x(), e_B.vec().y(), e_B.vec().z()}},
                     {"inliers", inliers},
                     {"matches", lines}};
    std::ofstream out(fs::path(opt.out_dir) / "planar_result.json");
    out << j.dump(2) << "\n";
    std::cout << j.dump(2) << "\n";
    return 0;
  }

  const auto t0 = std::chrono::steady_clock::now();
  MatchStats mstats;
  RansacStats rstats;
  const auto candidates = generate_candidates(A, B, opt.match, opt.seed, &mstats);
  EpipolarModel initial = ransac_calibrate(candidates, A, B, opt.ransac, &rstats);
  EpipolarModel refined = refine_model(initial, candidates, A, B, opt.ransac);
  const auto t1 = std::chrono::steady_clock::now();

  CalibrationResult result{std::move(refined), candidates, mstats, rstats,
                           std::chrono::duration<double>(t1 - t0).count()};
  const fs::path out_path = fs::path(opt.out_dir) / "result.json";
  write_result(out_path, result);
  if (opt.svg)
    write_svg_overlay(fs::path(opt.out_dir) / "overlay.svg", result.model, candidates,
                      A.width(), A.height(), B.width(), B.height());
  std::cout << "validation_score " << result.model.validation_score << ", "
            << candidates.size() << " candidates, wrote " << out_path.string() << "\n";
  return 0;
}

int run_evaluate(const CliOptions& opt, const std::string& csv_out) {
  const CalibrationResult result = read_result(opt.result_path);
  const GroundTruth gt = read_ground_truth(opt.gt_path);
  const EvalReport report =
      evaluate_model(result.model, gt, opt.n_samples, result.candidates, opt.seed);
  const std::string csv = eval_report_csv(report);
  if (!csv_out.empty()) {
    std::ofstream out(csv_out);
    if (!out) throw FormatError("cannot open " + csv_out + " for writing");
    out << csv;
  }
  std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Epipolar geometry from motion barcodes of synchronized video pairs"};
  app.require_subcommand(1);
  CliOptions opt;
  std::string csv_out;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", opt.seed, "random seed")
        ->each([&](const std::string&) { opt.seed_set = true; });
  };

  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic scene");
  sim->add_option("--config", opt.config_path, "scene config JSON")->required();
  sim->add_option("--out", opt.out_dir, "output directory");
  add_seed(sim);

  CLI::App* cal = app.add_subcommand("calibrate", "recover epipolar geometry");
  cal->add_option("trackA", opt.track_A, "camera A track (JSONL)")->required();
  cal->add_option("trackB", opt.track_B, "camera B track (JSONL)")->required();
  cal->add_option("--out", opt.out_dir, "output directory");
  cal->add_option("--mode", opt.mode, "standard|planar")
      ->check(CLI::IsMember({"standard", "planar"}));
  cal->add_flag("--svg", opt.svg, "write an SVG overlay of recovered line pairs");
  cal->add_option("--tau-p", opt.match.tau_p, "recurrence tolerance (px)");
  cal->add_option("--tau-l", opt.match.tau_l, "point-on-line tolerance (px)");
  cal->add_option("--theta-ncc", opt.match.theta_ncc, "candidate NCC threshold");
  cal->add_option("--theta-planar", opt.planar.theta_planar, "planar NCC threshold");
  cal->add_option("--tau-e", opt.planar.tau_e, "planar perpendicular threshold (px)");
  cal->add_option("--disc-radius", opt.planar.disc_radius, "planar disc radius (px)");
  cal->add_flag("--perpendicular", opt.planar.perpendicular_test,
                "use the perpendicular-distance inlier test in planar voting");
  cal->add_option("--iterations", opt.ransac.iterations, "RANSAC iterations");
  cal->add_option("--validation-lines", opt.ransac.validation_lines,
                  "pencil lines per validation");
  cal->add_option("--refine-iterations", opt.ransac.refine_iterations,
                  "re-estimation RANSAC iterations");
  add_seed(cal);

  CLI::App* ev = app.add_subcommand("evaluate", "score a result against ground truth");
  ev->add_option("result", opt.result_path, "calibration result JSON")->required();
  ev->add_option("ground_truth", opt.gt_path, "ground truth JSON")->required();
  ev->add_option("--out", csv_out, "CSV output path");
  ev->add_option("--n-samples", opt.n_samples, "correspondences to sample");
  add_seed(ev);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return run_simulate(opt);
    if (cal->parsed()) return run_calibrate(opt);
    if (ev->parsed()) return run_evaluate(opt, csv_out);
  } catch (const SyncError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NoValidModel& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const InsufficientCandidates& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const InsufficientLines& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const ValidationStarved& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const EmptyFrame& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const NoBarcodeSignal& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
