#include "epiline/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace epiline {

namespace {

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int uniform_int(Rng& rng, int n) {
  return static_cast<int>(uniform01(rng) * n) % n;
}

constexpr double kIncidentTol = 1e-9;

struct DedupResult {
  std::vector<HomogeneousLine> lines;
  std::vector<double> weights;
};

// Near-duplicate lines collapse into one weighted representative.
DedupResult dedup_lines(std::span<const HomogeneousLine> lines) {
  DedupResult out;
  for (const auto& l : lines) {
    bool merged = false;
    for (std::size_t i = 0; i < out.lines.size(); ++i) {
      if (same_line(l, out.lines[i], 1e-8)) {
        out.weights[i] += 1.0;
        merged = true;
        break;
      }
    }
    if (!merged) {
      out.lines.push_back(l);
      out.weights.push_back(1.0);
    }
  }
  return out;
}

bool parallel(const HomogeneousLine& a, const HomogeneousLine& b) {
  const auto& u = a.coeffs();
  const auto& v = b.coeffs();
  return std::abs(u.x() * v.y() - u.y() * v.x()) < 1e-12;
}

}  // namespace

LineArrangement::LineArrangement(std::span<const HomogeneousLine> lines) {
  auto dd = dedup_lines(lines);
  lines_ = std::move(dd.lines);
  const int n = static_cast<int>(lines_.size());
  on_line_.resize(static_cast<std::size_t>(n));
  rank_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (parallel(lines_[static_cast<std::size_t>(i)],
                   lines_[static_cast<std::size_t>(j)]))
        continue;
      const Eigen::Vector3d c = lines_[static_cast<std::size_t>(i)].coeffs().cross(
          lines_[static_cast<std::size_t>(j)].coeffs());
      vertices_.push_back({i, j, Eigen::Vector2d(c.x() / c.z(), c.y() / c.z())});
    }
  }
  for (int i = 0; i < n; ++i) {
    auto& lst = on_line_[static_cast<std::size_t>(i)];
    for (std::size_t v = 0; v < vertices_.size(); ++v)
      if (vertices_[v].i == i || vertices_[v].j == i) lst.push_back(static_cast<int>(v));
    const Eigen::Vector2d dir = lines_[static_cast<std::size_t>(i)].direction();
    std::stable_sort(lst.begin(), lst.end(), [&](int a, int b) {
      return dir.dot(vertices_[static_cast<std::size_t>(a)].p) <
             dir.dot(vertices_[static_cast<std::size_t>(b)].p);
    });
    auto& rk = rank_[static_cast<std::size_t>(i)];
    rk.resize(vertices_.size(), -1);
    for (std::size_t r = 0; r < lst.size(); ++r)
      rk[static_cast<std::size_t>(lst[r])] = static_cast<int>(r);
  }
}

std::vector<int> LineArrangement::neighbors(int v) const {
  std::vector<int> out;
  const Vertex& vx = vertices_[static_cast<std::size_t>(v)];
  for (int line : {vx.i, vx.j}) {
    const auto& lst = on_line_[static_cast<std::size_t>(line)];
    const int r = rank_[static_cast<std::size_t>(line)][static_cast<std::size_t>(v)];
    if (r > 0) out.push_back(lst[static_cast<std::size_t>(r - 1)]);
    if (r + 1 < static_cast<int>(lst.size()))
      out.push_back(lst[static_cast<std::size_t>(r + 1)]);
  }
  return out;
}

std::vector<LinePairCandidate> classify_inliers(
    std::span<const LinePairCandidate> candidates, const HomogeneousPoint& e_A,
    const HomogeneousPoint& e_B, double width_A, double height_A, double width_B,
    double height_B) {
  std::vector<LinePairCandidate> out;
  for (const auto& c : candidates) {
    if (area_inlier(c.l_A, e_A, width_A, height_A) &&
        area_inlier(c.l_B, e_B, width_B, height_B))
      out.push_back(c);
  }
  return out;
}

HomogeneousPoint l2_epipole(std::span<const HomogeneousLine> lines) {
  if (lines.size() < 2) throw SingularNormalEquations("need >= 2 lines");
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  for (const auto& l : lines) {
    const Eigen::Vector2d n = l.normal();
    A += n * n.transpose();
    b -= l.coeffs().z() * n;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(A);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(1);
  if (!(lo > 0.0) || hi / lo > 1e12) throw SingularNormalEquations();
  const Eigen::Vector2d e = A.ldlt().solve(b);
  return HomogeneousPoint(e.x(), e.y());
}

std::pair<HomogeneousPoint, double> l1_epipole_brute(
    std::span<const HomogeneousLine> lines) {
  const int n = static_cast<int>(lines.size());
  double best = std::numeric_limits<double>::infinity();
  std::optional<Eigen::Vector2d> best_p;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (parallel(lines[static_cast<std::size_t>(i)], lines[static_cast<std::size_t>(j)]))
        continue;
      const Eigen::Vector3d c = lines[static_cast<std::size_t>(i)].coeffs().cross(
          lines[static_cast<std::size_t>(j)].coeffs());
      const Eigen::Vector3d v(c.x() / c.z(), c.y() / c.z(), 1.0);
      double loss = 0.0;
      for (const auto& l : lines) loss += std::abs(l.coeffs().dot(v));
      if (loss < best) {
        best = loss;
        best_p = v.head<2>();
      }
    }
  }
  if (!best_p) throw NoFiniteVertex();
  return {HomogeneousPoint(best_p->x(), best_p->y()), best};
}

std::pair<HomogeneousPoint, double> l1_epipole_iterative(
    std::span<const HomogeneousLine> lines, Rng& rng, L1Stats* stats) {
  const LineArrangement arr(lines);
  const auto& ls = arr.lines();
  const auto& verts = arr.vertices();
  if (verts.empty()) throw NoFiniteVertex();
  const int n = static_cast<int>(ls.size());
  // weights of the deduplicated representatives
  const auto dd = dedup_lines(lines);

  int cur = uniform_int(rng, static_cast<int>(verts.size()));
  Eigen::Vector3d q(verts[static_cast<std::size_t>(cur)].p.x(),
                    verts[static_cast<std::size_t>(cur)].p.y(), 1.0);

  std::vector<int> sign(static_cast<std::size_t>(n), 1);
  Eigen::Vector3d d = Eigen::Vector3d::Zero();
  for (int k = 0; k < n; ++k) {
    const double t = ls[static_cast<std::size_t>(k)].coeffs().dot(q);
    sign[static_cast<std::size_t>(k)] = (t >= -kIncidentTol) ? 1 : -1;
    d += sign[static_cast<std::size_t>(k)] * dd.weights[static_cast<std::size_t>(k)] *
         ls[static_cast<std::size_t>(k)].coeffs();
  }
  double loss = d.dot(q);
  int visits = 1;
  long additions = 0;

  const long cap = static_cast<long>(n) * n;
  while (true) {
    if (visits > cap) throw TraversalOverflow();
    const auto& vx = verts[static_cast<std::size_t>(cur)];
    double best_loss = loss;
    int best_v = -1;
    int best_flip_line = -1;  // line leaving incidence whose sign may change
    for (int shared : {vx.i, vx.j}) {
      const int other_cur = (shared == vx.i) ? vx.j : vx.i;
      const auto& lst = arr.vertices_on_line(shared);
      // locate cur in lst via neighbor scan
      for (std::size_t r = 0; r < lst.size(); ++r) {
        if (lst[r] != cur) continue;
        for (int step : {-1, 1}) {
          const std::size_t rr = r + static_cast<std::size_t>(step);
          if (step < 0 && r == 0) continue;
          if (rr >= lst.size()) continue;
          const int nv = lst[rr];
          const auto& nvx = verts[static_cast<std::size_t>(nv)];
          const Eigen::Vector3d rvec(nvx.p.x(), nvx.p.y(), 1.0);
          double cand = d.dot(rvec);
          const double t =
              ls[static_cast<std::size_t>(other_cur)].coeffs().dot(rvec);
          const int s = sign[static_cast<std::size_t>(other_cur)];
          if (s * t < 0.0)
            cand -= 2.0 * dd.weights[static_cast<std::size_t>(other_cur)] * s * t;
          if (cand < best_loss - 0.0) {
            best_loss = cand;
            best_v = nv;
            best_flip_line = other_cur;
          }
        }
        break;
      }
    }
    if (best_v < 0) break;

    const auto& nvx = verts[static_cast<std::size_t>(best_v)];
    const Eigen::Vector3d rvec(nvx.p.x(), nvx.p.y(), 1.0);
    // departure: assign the line leaving incidence by its true sign
    {
      const int k = best_flip_line;
      const double t = ls[static_cast<std::size_t>(k)].coeffs().dot(rvec);
      const int s_new = (t >= -kIncidentTol) ? 1 : -1;
      int& s = sign[static_cast<std::size_t>(k)];
      if (s_new != s) {
        d += (s_new - s) * dd.weights[static_cast<std::size_t>(k)] *
             ls[static_cast<std::size_t>(k)].coeffs();
        s = s_new;
        additions += 3;
      }
    }
    // arrival: lines incident to the new vertex go to pos
    for (int k : {nvx.i, nvx.j}) {
      int& s = sign[static_cast<std::size_t>(k)];
      if (s < 0) {
        d += 2.0 * dd.weights[static_cast<std::size_t>(k)] *
             ls[static_cast<std::size_t>(k)].coeffs();
        s = 1;
        additions += 3;
      }
    }
    cur = best_v;
    q = rvec;
    loss = best_loss;
    ++visits;
  }
  if (stats) {
    stats->vertex_visits = visits;
    stats->coefficient_additions = additions;
  }
  return {HomogeneousPoint(q.x(), q.y()), loss};
}

EpipolarModel reestimate_with_epipoles(const HomogeneousPoint& e_A,
                                       const HomogeneousPoint& e_B,
                                       const VideoTrack& video_A,
                                       const VideoTrack& video_B,
                                       const RansacParams& params,
                                       std::uint64_t stream) {
  std::vector<int> eligible;
  for (int t = 0; t < video_A.n_frames(); ++t)
    if (!video_A.frame(t).detections.empty() && !video_B.frame(t).detections.empty())
      eligible.push_back(t);
  if (eligible.size() < 3) throw EmptyFrame("fewer than 3 frames with detections");

  struct Best {
    double score;
    std::array<LinePair, 3> pairs;
    std::array<double, 3> scores;
    PencilHomography H;
  };
  std::optional<Best> best;

  for (int iter = 0; iter < params.refine_iterations; ++iter) {
    Rng rng(derive_seed(params.seed ^ (stream * 0x9e3779b97f4a7c15ull),
                        static_cast<std::uint64_t>(iter)));
    // three distinct eligible frames
    std::array<int, 3> frames{};
    for (int k = 0; k < 3; ++k) {
      int f;
      bool dup;
      int guard = 0;
      do {
        f = eligible[static_cast<std::size_t>(
            uniform_int(rng, static_cast<int>(eligible.size())))];
        dup = false;
        for (int m = 0; m < k; ++m) dup |= frames[static_cast<std::size_t>(m)] == f;
      } while (dup && ++guard < 100);
      if (dup) break;
      frames[static_cast<std::size_t>(k)] = f;
    }

    std::vector<LinePair> chosen;
    std::vector<double> chosen_scores;
    for (int f : frames) {
      std::vector<HomogeneousLine> T_A, T_B;
      for (const Detection& det : video_A.frame(f).detections) {
        try {
          T_A.push_back(line_through(HomogeneousPoint(det.x, det.y), e_A));
        } catch (const CoincidentPoints&) {
        }
      }
      for (const Detection& det : video_B.frame(f).detections) {
        try {
          T_B.push_back(line_through(HomogeneousPoint(det.x, det.y), e_B));
        } catch (const CoincidentPoints&) {
        }
      }
      double fb = -2.0;
      std::optional<LinePair> fp;
      std::vector<std::optional<MotionBarcode>> bc_B(T_B.size());
      for (const auto& la : T_A) {
        const MotionBarcode ba = line_barcode(video_A, la);
        if (ba.constant()) continue;
        for (std::size_t j = 0; j < T_B.size(); ++j) {
          if (!bc_B[j]) bc_B[j] = line_barcode(video_B, T_B[j]);
          if (bc_B[j]->constant()) continue;
          const double s = ncc(ba, *bc_B[j]);
          if (s > fb) {
            fb = s;
            fp = LinePair{la, T_B[j]};
          }
        }
      }
      if (!fp) break;
      chosen.push_back(*fp);
      chosen_scores.push_back(fb);
    }
    if (chosen.size() != 3) continue;

    try {
      const std::array<LinePair, 3> pairs = {chosen[0], chosen[1], chosen[2]};
      PencilHomography H = fit_pencil_homography(
          pairs, e_A, e_B, video_A.width(), video_A.height(), video_B.width(),
          video_B.height());
      const double score =
          validate(e_A, e_B, H, video_A, video_B, params.validation_lines, rng);
      if (!best || score > best->score)
        best = Best{score, pairs,
                    {chosen_scores[0], chosen_scores[1], chosen_scores[2]},
                    std::move(H)};
    } catch (const std::runtime_error&) {
      continue;
    }
  }
  if (!best) throw NoValidModel();

  FundamentalMatrix F = assemble_fundamental(
      e_A, e_B, {best->pairs[0], best->pairs[1], best->pairs[2]});
  return EpipolarModel{
      e_A,
      e_B,
      std::move(best->H),
      std::move(F),
      best->score,
      {LinePairCandidate{best->pairs[0].first, best->pairs[0].second, best->scores[0],
                         {-1, -1, -1}},
       LinePairCandidate{best->pairs[1].first, best->pairs[1].second, best->scores[1],
                         {-1, -1, -1}},
       LinePairCandidate{best->pairs[2].first, best->pairs[2].second, best->scores[2],
                         {-1, -1, -1}}},
  };
}

EpipolarModel refine_model(const EpipolarModel& initial,
                           std::span<const LinePairCandidate> candidates,
                           const VideoTrack& video_A, const VideoTrack& video_B,
                           const RansacParams& params) {
  const auto inliers =
      classify_inliers(candidates, initial.e_A, initial.e_B, video_A.width(),
                       video_A.height(), video_B.width(), video_B.height());
  std::vector<HomogeneousLine> lines_A, lines_B;
  for (const auto& c : inliers) {
    lines_A.push_back(c.l_A);
    lines_B.push_back(c.l_B);
  }
  for (const auto& c : initial.defining_pairs) {
    lines_A.push_back(c.l_A);
    lines_B.push_back(c.l_B);
  }

  std::vector<EpipolarModel> variants;
  variants.push_back(initial);

  try {
    const HomogeneousPoint eA2 = l2_epipole(lines_A);
    const HomogeneousPoint eB2 = l2_epipole(lines_B);
    variants.push_back(
        reestimate_with_epipoles(eA2, eB2, video_A, video_B, params, 1));
  } catch (const std::runtime_error&) {
  }

  try {
    Rng rng_a(derive_seed(params.seed, 0xaa11));
    Rng rng_b(derive_seed(params.seed, 0xbb22));
    const auto [eA1, lossA] = l1_epipole_iterative(lines_A, rng_a);
    const auto [eB1, lossB] = l1_epipole_iterative(lines_B, rng_b);
    variants.push_back(
        reestimate_with_epipoles(eA1, eB1, video_A, video_B, params, 2));
  } catch (const std::runtime_error&) {
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < variants.size(); ++i)
    if (variants[i].validation_score > variants[best].validation_score) best = i;
  return variants[best];
}

}  // namespace epiline
