#include "epiline/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace epiline {

namespace {

struct FlatDetection {
  int frame;
  int index;
  double x;
  double y;
};

std::int64_t cell_key(double v, double cell) {
  return static_cast<std::int64_t>(std::floor(v / cell));
}

std::int64_t grid_key(std::int64_t cx, std::int64_t cy) {
  return cx * 73856093 + cy * 19349663;
}

}  // namespace

std::vector<RecurringPixel> find_recurring_pixels(const VideoTrack& video_A,
                                                  double tau_p) {
  std::vector<FlatDetection> dets;
  for (const FrameTrack& f : video_A.frames())
    for (std::size_t j = 0; j < f.detections.size(); ++j)
      dets.push_back({f.frame_index, static_cast<int>(j), f.detections[j].x,
                      f.detections[j].y});

  const double cell = std::max(tau_p, 1e-6);
  std::unordered_map<std::int64_t, std::vector<int>> grid;
  for (std::size_t i = 0; i < dets.size(); ++i)
    grid[grid_key(cell_key(dets[i].x, cell), cell_key(dets[i].y, cell))].push_back(
        static_cast<int>(i));

  const auto neighbors = [&](int i) {
    std::vector<int> out;
    const std::int64_t cx = cell_key(dets[static_cast<std::size_t>(i)].x, cell);
    const std::int64_t cy = cell_key(dets[static_cast<std::size_t>(i)].y, cell);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = grid.find(grid_key(cx + dx, cy + dy));
        if (it == grid.end()) continue;
        for (int j : it->second) {
          const auto& a = dets[static_cast<std::size_t>(i)];
          const auto& b = dets[static_cast<std::size_t>(j)];
          if (std::hypot(a.x - b.x, a.y - b.y) <= tau_p) out.push_back(j);
        }
      }
    return out;
  };

  std::vector<int> degree(dets.size(), 0);
  for (std::size_t i = 0; i < dets.size(); ++i)
    degree[i] = static_cast<int>(neighbors(static_cast<int>(i)).size());

  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return degree[static_cast<std::size_t>(a)] > degree[static_cast<std::size_t>(b)];
  });

  std::vector<char> used(dets.size(), 0);
  std::vector<RecurringPixel> out;
  for (int seed : order) {
    if (used[static_cast<std::size_t>(seed)]) continue;
    const auto& s = dets[static_cast<std::size_t>(seed)];
    // nearest unclaimed detection per frame within tau_p of the seed
    std::unordered_map<int, int> per_frame;
    for (int j : neighbors(seed)) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const auto& d = dets[static_cast<std::size_t>(j)];
      auto it = per_frame.find(d.frame);
      if (it == per_frame.end()) {
        per_frame[d.frame] = j;
      } else {
        const auto& cur = dets[static_cast<std::size_t>(it->second)];
        if (std::hypot(d.x - s.x, d.y - s.y) < std::hypot(cur.x - s.x, cur.y - s.y))
          it->second = j;
      }
    }
    if (per_frame.size() < 2) continue;
    RecurringPixel rp{HomogeneousPoint(s.x, s.y), {}};
    for (const auto& [frame, j] : per_frame) {
      used[static_cast<std::size_t>(j)] = 1;
      rp.occurrences.emplace_back(frame, dets[static_cast<std::size_t>(j)].index);
    }
    std::sort(rp.occurrences.begin(), rp.occurrences.end());
    out.push_back(std::move(rp));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.occurrences.size() > b.occurrences.size();
  });
  return out;
}

std::vector<HomogeneousLine> candidate_lines_B(const RecurringPixel& rp,
                                               const VideoTrack& video_B,
                                               const MatchParams& params) {
  std::vector<HomogeneousLine> out;
  if (rp.occurrences.size() < 2) return out;
  const int t_i = rp.occurrences[0].first;
  const int t_j = rp.occurrences[1].first;
  if (t_i >= video_B.n_frames() || t_j >= video_B.n_frames()) return out;

  std::vector<int> other_frames;
  for (std::size_t k = 2; k < rp.occurrences.size(); ++k)
    other_frames.push_back(rp.occurrences[k].first);

  for (const Detection& q1 : video_B.frame(t_i).detections) {
    for (const Detection& q2 : video_B.frame(t_j).detections) {
      if (std::hypot(q1.x - q2.x, q1.y - q2.y) <= params.tau_p) continue;
      HomogeneousLine l(0, 1, 0);
      try {
        l = line_through(HomogeneousPoint(q1.x, q1.y), HomogeneousPoint(q2.x, q2.y));
      } catch (const CoincidentPoints&) {
        continue;
      }
      bool ok = true;
      for (int t : other_frames) {
        if (t >= video_B.n_frames()) {
          ok = false;
          break;
        }
        bool hit = false;
        for (const Detection& q : video_B.frame(t).detections) {
          if (std::abs(signed_distance(l, HomogeneousPoint(q.x, q.y))) <= params.tau_l) {
            hit = true;
            break;
          }
        }
        if (!hit) {
          ok = false;
          break;
        }
      }
      if (ok) out.push_back(l);
    }
  }
  return out;
}

std::optional<LinePairCandidate> match_line_in_A(const HomogeneousLine& l_B,
                                                 const RecurringPixel& rp,
                                                 const VideoTrack& video_A,
                                                 const VideoTrack& video_B,
                                                 const MatchParams& params, Rng& rng,
                                                 MatchStats* stats) {
  std::vector<char> is_occurrence(static_cast<std::size_t>(video_A.n_frames()), 0);
  for (const auto& [t, j] : rp.occurrences)
    if (t < video_A.n_frames()) is_occurrence[static_cast<std::size_t>(t)] = 1;

  std::vector<int> frames(static_cast<std::size_t>(video_B.n_frames()));
  std::iota(frames.begin(), frames.end(), 0);
  std::shuffle(frames.begin(), frames.end(), rng);

  int t_k = -1;
  for (int t : frames) {
    if (t < video_A.n_frames() && is_occurrence[static_cast<std::size_t>(t)]) continue;
    if (t >= video_A.n_frames() || video_A.frame(t).detections.empty()) continue;
    bool on_line = false;
    for (const Detection& q : video_B.frame(t).detections) {
      if (std::abs(signed_distance(l_B, HomogeneousPoint(q.x, q.y))) <= params.tau_l) {
        on_line = true;
        break;
      }
    }
    if (on_line) {
      t_k = t;
      break;
    }
  }
  if (t_k < 0) throw NoThirdFrame();

  MotionBarcode b_B = line_barcode(video_B, l_B);
  if (stats) ++stats->barcode_evaluations;
  if (b_B.constant()) return std::nullopt;

  double best_score = -2.0;
  std::optional<HomogeneousLine> best_line;
  for (const Detection& p : video_A.frame(t_k).detections) {
    HomogeneousLine l_A(0, 1, 0);
    try {
      l_A = line_through(rp.position, HomogeneousPoint(p.x, p.y));
    } catch (const CoincidentPoints&) {
      continue;
    }
    const MotionBarcode b_A = line_barcode(video_A, l_A);
    if (stats) ++stats->barcode_evaluations;
    if (b_A.constant()) continue;
    const double s = ncc(b_A, b_B);
    if (s > best_score) {
      best_score = s;
      best_line = l_A;
    }
  }
  if (!best_line || best_score < params.theta_ncc) return std::nullopt;
  return LinePairCandidate{*best_line, l_B, best_score,
                           {rp.occurrences[0].first, rp.occurrences[1].first, t_k}};
}

std::vector<LinePairCandidate> generate_candidates(const VideoTrack& video_A,
                                                   const VideoTrack& video_B,
                                                   const MatchParams& params,
                                                   std::uint64_t seed,
                                                   MatchStats* stats) {
  const auto rps = find_recurring_pixels(video_A, params.tau_p);
  if (stats) stats->recurring_pixels = static_cast<long>(rps.size());

  std::vector<LinePairCandidate> all;
  for (std::size_t i = 0; i < rps.size(); ++i) {
    const auto lambda_B = candidate_lines_B(rps[i], video_B, params);
    if (stats) stats->candidate_lines_B += static_cast<long>(lambda_B.size());
    Rng rng(derive_seed(seed, i));
    for (const HomogeneousLine& l_B : lambda_B) {
      try {
        if (auto c = match_line_in_A(l_B, rps[i], video_A, video_B, params, rng, stats))
          all.push_back(*c);
      } catch (const NoThirdFrame&) {
        // candidate dropped
      }
    }
  }

  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    const auto ca = a.l_A.coeffs();
    const auto cb = b.l_A.coeffs();
    return std::lexicographical_compare(ca.data(), ca.data() + 3, cb.data(),
                                        cb.data() + 3);
  });
  std::vector<LinePairCandidate> out;
  for (const auto& c : all) {
    bool dup = false;
    for (const auto& kept : out) {
      if (same_line(c.l_A, kept.l_A, 1e-6) && same_line(c.l_B, kept.l_B, 1e-6)) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(c);
  }
  if (out.size() < 2) throw InsufficientCandidates();
  return out;
}

}  // namespace epiline
