#include "epiline/sim.hpp"

#include <algorithm>
#include <cmath>

namespace epiline {

namespace {

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(Rng& rng, double lo, double hi) {
  return lo + uniform01(rng) * (hi - lo);
}

// Box-Muller, kept local for cross-platform determinism.
double gauss(Rng& rng) {
  const double u1 = std::max(uniform01(rng), 1e-300);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Eigen::Vector2d project(const Eigen::Matrix<double, 3, 4>& P, const Eigen::Vector3d& X,
                        double* depth = nullptr) {
  const Eigen::Vector4d Xh(X.x(), X.y(), X.z(), 1.0);
  const Eigen::Vector3d x = P * Xh;
  if (depth) *depth = x.z();
  return {x.x() / x.z(), x.y() / x.z()};
}

}  // namespace

Eigen::Matrix<double, 3, 4> make_camera(const Eigen::Vector3d& center, double focal,
                                        double width, double height) {
  const Eigen::Vector3d z = (-center).normalized();  // look at origin
  Eigen::Vector3d up(0, 0, 1);
  if (std::abs(up.dot(z)) > 0.99) up = Eigen::Vector3d(0, 1, 0);
  const Eigen::Vector3d x = up.cross(z).normalized();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d R;
  R.row(0) = x;
  R.row(1) = y;
  R.row(2) = z;
  Eigen::Matrix3d K = Eigen::Matrix3d::Identity();
  K(0, 0) = K(1, 1) = focal;
  K(0, 2) = width / 2.0;
  K(1, 2) = height / 2.0;
  Eigen::Matrix<double, 3, 4> Rt;
  Rt.leftCols<3>() = R;
  Rt.col(3) = -R * center;
  return K * Rt;
}

SceneConfig default_scene_config(MotionModel motion, std::uint64_t seed) {
  SceneConfig cfg;
  cfg.motion = motion;
  cfg.seed = seed;
  const double f = 600.0;
  if (motion == MotionModel::Planar) {
    cfg.P_A = make_camera({9.0, 2.0, 0.0}, f, cfg.width, cfg.height);
    cfg.P_B = make_camera({4.5, -5.5, 5.5}, f, cfg.width, cfg.height);
  } else {
    cfg.P_A = make_camera({9.0, 1.5, 2.5}, f, cfg.width, cfg.height);
    cfg.P_B = make_camera({5.5, 7.0, 3.5}, f, cfg.width, cfg.height);
  }
  return cfg;
}

Eigen::Vector3d camera_center(const Eigen::Matrix<double, 3, 4>& P) {
  const Eigen::JacobiSVD<Eigen::Matrix<double, 3, 4>> svd(P, Eigen::ComputeFullV);
  Eigen::Vector4d c = svd.matrixV().col(3);
  if (std::abs(c.w()) < 1e-12) throw ConfigError("camera center at infinity");
  return c.head<3>() / c.w();
}

GroundTruth ground_truth_from_cameras(const Eigen::Matrix<double, 3, 4>& P_A,
                                      const Eigen::Matrix<double, 3, 4>& P_B, int width,
                                      int height, double volume) {
  const Eigen::Vector3d C_A = camera_center(P_A);
  const Eigen::Vector3d C_B = camera_center(P_B);
  if ((C_A - C_B).norm() < 1e-9) throw ConfigError("coincident camera centers");

  const Eigen::Vector4d C_Ah(C_A.x(), C_A.y(), C_A.z(), 1.0);
  const Eigen::Vector4d C_Bh(C_B.x(), C_B.y(), C_B.z(), 1.0);
  const Eigen::Vector3d e_B = P_B * C_Ah;
  const Eigen::Vector3d e_A = P_A * C_Bh;

  const Eigen::Matrix<double, 4, 3> pinv_A =
      P_A.transpose() * (P_A * P_A.transpose()).inverse();
  Eigen::Matrix3d cross;
  cross << 0, -e_B.z(), e_B.y(), e_B.z(), 0, -e_B.x(), -e_B.y(), e_B.x(), 0;
  const Eigen::Matrix3d Fm = cross * (P_B * pinv_A);

  return GroundTruth{FundamentalMatrix::from_matrix(Fm),
                     HomogeneousPoint::from_homogeneous(e_A),
                     HomogeneousPoint::from_homogeneous(e_B),
                     P_A,
                     P_B,
                     width,
                     height,
                     volume};
}

std::pair<HomogeneousPoint, HomogeneousPoint> GroundTruth::sample_correspondence(
    Rng& rng) const {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Eigen::Vector3d X(uniform(rng, -volume, volume), uniform(rng, -volume, volume),
                            uniform(rng, -volume, volume));
    double dA = 0.0, dB = 0.0;
    const Eigen::Vector2d a = project(P_A, X, &dA);
    const Eigen::Vector2d b = project(P_B, X, &dB);
    if (dA <= 0.0 || dB <= 0.0) continue;
    if (a.x() < 0 || a.x() > width || a.y() < 0 || a.y() > height) continue;
    if (b.x() < 0 || b.x() > width || b.y() < 0 || b.y() > height) continue;
    return {HomogeneousPoint(a.x(), a.y()), HomogeneousPoint(b.x(), b.y())};
  }
  throw ConfigError("cameras do not image the motion volume");
}

Scene generate_scene(const SceneConfig& cfg) {
  if (cfg.n_frames <= 0) throw ConfigError("n_frames must be positive");
  if (cfg.n_objects <= 0) throw ConfigError("n_objects must be positive");
  if (!(cfg.radius_min > 0.0) || cfg.radius_max < cfg.radius_min)
    throw ConfigError("invalid radius range");
  if (!(cfg.volume > 0.0)) throw ConfigError("empty motion volume");

  GroundTruth gt = ground_truth_from_cameras(cfg.P_A, cfg.P_B, cfg.width, cfg.height,
                                             cfg.volume);
  const bool planar = cfg.motion == MotionModel::Planar;
  if (planar) {
    const Eigen::Vector3d C_A = camera_center(cfg.P_A);
    if (std::abs(C_A.z()) > 1e-9)
      throw ConfigError("planar mode requires camera A on the motion plane");
  }

  Rng rng(cfg.seed);
  struct Object {
    Eigen::Vector3d pos;
    Eigen::Vector3d vel;
    double radius;
  };
  std::vector<Object> objects;
  const double v = cfg.volume;
  for (int i = 0; i < cfg.n_objects; ++i) {
    Object o;
    o.pos = {uniform(rng, -v, v), uniform(rng, -v, v), planar ? 0.0 : uniform(rng, -v, v)};
    const double speed = uniform(rng, 0.015, 0.045);
    const double az = uniform(rng, 0.0, 2.0 * M_PI);
    const double el = planar ? 0.0 : uniform(rng, -1.0, 1.0);
    o.vel = speed * Eigen::Vector3d(std::cos(az) * std::sqrt(1 - el * el),
                                    std::sin(az) * std::sqrt(1 - el * el), el);
    o.radius = uniform(rng, cfg.radius_min, cfg.radius_max);
    objects.push_back(o);
  }

  const int redirect_every = 80;
  const Eigen::Vector3d centers[2] = {camera_center(cfg.P_A), camera_center(cfg.P_B)};
  std::vector<FrameTrack> frames_A, frames_B;
  for (int t = 0; t < cfg.n_frames; ++t) {
    FrameTrack fa{t, {}};
    FrameTrack fb{t, {}};
    for (std::size_t oi = 0; oi < objects.size(); ++oi) {
      Object& o = objects[oi];
      if (cfg.motion == MotionModel::PiecewiseLinear3D && t > 0 &&
          (t + static_cast<int>(oi) * 17) % redirect_every == 0) {
        const double speed = o.vel.norm();
        const double az = uniform(rng, 0.0, 2.0 * M_PI);
        const double el = uniform(rng, -1.0, 1.0);
        o.vel = speed * Eigen::Vector3d(std::cos(az) * std::sqrt(1 - el * el),
                                        std::sin(az) * std::sqrt(1 - el * el), el);
      }

      for (int cam = 0; cam < 2; ++cam) {
        const auto& P = cam == 0 ? cfg.P_A : cfg.P_B;
        const Eigen::Vector3d C = cam == 0 ? centers[0] : centers[1];
        double depth = 0.0;
        const Eigen::Vector2d c = project(P, o.pos, &depth);
        if (depth <= 0.0) continue;
        // image radius via a world offset perpendicular to the viewing ray
        Eigen::Vector3d dir = (o.pos - C).normalized();
        Eigen::Vector3d perp = dir.cross(Eigen::Vector3d(0, 0, 1));
        if (perp.norm() < 1e-6) perp = dir.cross(Eigen::Vector3d(0, 1, 0));
        perp.normalize();
        const Eigen::Vector2d edge = project(P, o.pos + o.radius * perp);
        const double radius_px = (edge - c).norm();

        Eigen::Vector2d centroid = c;
        centroid.x() += cfg.sigma * gauss(rng);
        centroid.y() += cfg.sigma * gauss(rng);
        if (centroid.x() < 0 || centroid.x() > cfg.width || centroid.y() < 0 ||
            centroid.y() > cfg.height)
          continue;
        Detection d{centroid.x(), centroid.y(), std::max(radius_px, 0.5)};
        if (cam == 0)
          fa.detections.push_back(d);
        else
          fb.detections.push_back(d);
      }

      // advance with reflection at the box walls
      o.pos += o.vel;
      for (int ax = 0; ax < (planar ? 2 : 3); ++ax) {
        if (o.pos[ax] > v) {
          o.pos[ax] = 2 * v - o.pos[ax];
          o.vel[ax] = -o.vel[ax];
        } else if (o.pos[ax] < -v) {
          o.pos[ax] = -2 * v - o.pos[ax];
          o.vel[ax] = -o.vel[ax];
        }
      }
    }
    frames_A.push_back(std::move(fa));
    frames_B.push_back(std::move(fb));
  }

  return Scene{VideoTrack(cfg.width, cfg.height, std::move(frames_A)),
               VideoTrack(cfg.width, cfg.height, std::move(frames_B)), std::move(gt)};
}

EvalReport evaluate_model(const EpipolarModel& model, const GroundTruth& gt,
                          int n_samples, std::span<const LinePairCandidate> candidates,
                          std::uint64_t seed) {
  if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
  Rng rng(derive_seed(seed, 0xe7a1));
  std::vector<std::pair<HomogeneousPoint, HomogeneousPoint>> matches;
  matches.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) matches.push_back(gt.sample_correspondence(rng));

  EvalReport rep;
  rep.n_samples = n_samples;
  rep.sed_mean = symmetric_epipolar_distance(model.F, matches);
  if (!model.e_A.infinite() && !gt.e_A.infinite())
    rep.e_A_error_px = std::hypot(model.e_A.x() - gt.e_A.x(), model.e_A.y() - gt.e_A.y());
  if (!model.e_B.infinite() && !gt.e_B.infinite())
    rep.e_B_error_px = std::hypot(model.e_B.x() - gt.e_B.x(), model.e_B.y() - gt.e_B.y());
  if (!candidates.empty()) {
    int inl = 0;
    for (const auto& c : candidates) {
      if (area_inlier(c.l_A, gt.e_A, gt.width, gt.height) &&
          area_inlier(c.l_B, gt.e_B, gt.width, gt.height))
        ++inl;
    }
    rep.inlier_rate = static_cast<double>(inl) / static_cast<double>(candidates.size());
  }
  return rep;
}

}  // namespace epiline
