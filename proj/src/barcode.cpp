#include "epiline/barcode.hpp"

#include <algorithm>
#include <cmath>

namespace epiline {

VideoTrack::VideoTrack(int width, int height, std::vector<FrameTrack> frames)
    : width_(width), height_(height), frames_(std::move(frames)) {
  if (width_ <= 0 || height_ <= 0) throw FormatError("non-positive image dimensions");
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    if (frames_[i].frame_index != static_cast<int>(i))
      throw FormatError("frame indices must be dense from 0");
    for (const Detection& d : frames_[i].detections) {
      if (!(d.r > 0.0) || !std::isfinite(d.r)) throw FormatError("non-positive radius");
      if (d.x < 0.0 || d.x > width_ || d.y < 0.0 || d.y > height_)
        throw FormatError("centroid outside image bounds");
    }
  }
}

int MotionBarcode::popcount() const {
  int n = 0;
  for (auto b : bits_) n += b != 0;
  return n;
}

bool MotionBarcode::constant() const {
  const int n = popcount();
  return n == 0 || n == size();
}

MotionBarcode line_barcode(const VideoTrack& video, const HomogeneousLine& l) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(video.n_frames()), 0);
  const double w = video.width();
  const double h = video.height();
  for (int i = 0; i < video.n_frames(); ++i) {
    for (const Detection& d : video.frame(i).detections) {
      const HomogeneousPoint c(d.x, d.y);
      if (std::abs(signed_distance(l, c)) >= d.r) continue;
      const Eigen::Vector2d foot = closest_point(l, {d.x, d.y});
      if (foot.x() < 0.0 || foot.x() > w || foot.y() < 0.0 || foot.y() > h) continue;
      bits[static_cast<std::size_t>(i)] = 1;
      break;
    }
  }
  return MotionBarcode(std::move(bits));
}

MotionBarcode disc_barcode(const VideoTrack& video, const HomogeneousPoint& p,
                           double radius) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(video.n_frames()), 0);
  for (int i = 0; i < video.n_frames(); ++i) {
    for (const Detection& d : video.frame(i).detections) {
      if (std::hypot(d.x - p.x(), d.y - p.y()) < radius + d.r) {
        bits[static_cast<std::size_t>(i)] = 1;
        break;
      }
    }
  }
  return MotionBarcode(std::move(bits));
}

double ncc(const MotionBarcode& b1, const MotionBarcode& b2) {
  if (b1.size() != b2.size()) throw FormatError("barcode length mismatch");
  const int n = b1.size();
  if (n == 0) throw ConstantBarcode("empty barcode");
  const int n1 = b1.popcount();
  const int n2 = b2.popcount();
  if (n1 == 0 || n1 == n || n2 == 0 || n2 == n) throw ConstantBarcode();
  const double m1 = static_cast<double>(n1) / n;
  const double m2 = static_cast<double>(n2) / n;
  double cov = 0.0;
  for (int i = 0; i < n; ++i)
    cov += ((b1[i] ? 1.0 : 0.0) - m1) * ((b2[i] ? 1.0 : 0.0) - m2);
  const double v1 = n1 * (1.0 - m1) * (1.0 - m1) + (n - n1) * m1 * m1;
  const double v2 = n2 * (1.0 - m2) * (1.0 - m2) + (n - n2) * m2 * m2;
  return cov / std::sqrt(v1 * v2);
}

}  // namespace epiline
