#pragma once

#include <cstdint>
#include <vector>

#include "epiline/geometry.hpp"

namespace epiline {

struct Detection {
  double x = 0.0;
  double y = 0.0;
  double r = 0.0;  // pixel radius
};

struct FrameTrack {
  int frame_index = 0;
  std::vector<Detection> detections;
};

/// Synchronized foreground-centroid track for one camera. Frame indices are
/// dense 0..N-1.
class VideoTrack {
 public:
  VideoTrack(int width, int height, std::vector<FrameTrack> frames);

  int width() const { return width_; }
  int height() const { return height_; }
  int n_frames() const { return static_cast<int>(frames_.size()); }
  const std::vector<FrameTrack>& frames() const { return frames_; }
  const FrameTrack& frame(int i) const { return frames_[static_cast<std::size_t>(i)]; }

 private:
  int width_;
  int height_;
  std::vector<FrameTrack> frames_;
};

class MotionBarcode {
 public:
  explicit MotionBarcode(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}

  int size() const { return static_cast<int>(bits_.size()); }
  bool operator[](int i) const { return bits_[static_cast<std::size_t>(i)] != 0; }
  int popcount() const;
  bool constant() const;
  const std::vector<std::uint8_t>& bits() const { return bits_; }

 private:
  std::vector<std::uint8_t> bits_;
};

/// Bit i set iff some detection disc in frame i meets l inside the image.
MotionBarcode line_barcode(const VideoTrack& video, const HomogeneousLine& l);

/// Bit i set iff some detection centroid in frame i is within
/// radius + detection radius of p.
MotionBarcode disc_barcode(const VideoTrack& video, const HomogeneousPoint& p,
                           double radius);

/// Pearson normalized cross-correlation of two equal-length barcodes.
double ncc(const MotionBarcode& b1, const MotionBarcode& b2);

}  // namespace epiline
