#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "epiline/errors.hpp"

namespace epiline {

/// Homogeneous image point. Finite points are stored with third coordinate
/// exactly 1; a zero third coordinate marks a point at infinity (stored as a
/// unit direction).
class HomogeneousPoint {
 public:
  HomogeneousPoint(double x, double y) : v_(x, y, 1.0) {}

  static HomogeneousPoint from_homogeneous(const Eigen::Vector3d& v);
  static HomogeneousPoint at_infinity(double dx, double dy);

  const Eigen::Vector3d& vec() const { return v_; }
  bool infinite() const { return v_.z() == 0.0; }
  double x() const { return v_.x(); }
  double y() const { return v_.y(); }

 private:
  explicit HomogeneousPoint(Eigen::Vector3d v) : v_(std::move(v)) {}
  Eigen::Vector3d v_;
};

/// Image line l with ||(l1,l2)|| = 1, so l.dot(p) is a pixel distance for a
/// finite normalized p. Sign is canonicalized (first nonzero of (l1,l2)
/// positive) so equal lines compare equal coefficient-wise.
class HomogeneousLine {
 public:
  HomogeneousLine(double a, double b, double c);
  static HomogeneousLine from_coeffs(const Eigen::Vector3d& l);

  /// Trusts l to already be normalized and sign-canonical; used when
  /// reloading serialized coefficients so round trips are bit-exact.
  static HomogeneousLine from_normalized(const Eigen::Vector3d& l) {
    HomogeneousLine out(l.x(), l.y(), l.z());
    out.l_ = l;
    return out;
  }

  const Eigen::Vector3d& coeffs() const { return l_; }
  Eigen::Vector2d normal() const { return l_.head<2>(); }
  Eigen::Vector2d direction() const { return {-l_.y(), l_.x()}; }

 private:
  Eigen::Vector3d l_;
};

HomogeneousLine line_through(const HomogeneousPoint& p, const HomogeneousPoint& q);
HomogeneousPoint intersect(const HomogeneousLine& l1, const HomogeneousLine& l2);
double signed_distance(const HomogeneousLine& l, const HomogeneousPoint& p);

/// Perpendicular foot of p on l.
Eigen::Vector2d closest_point(const HomogeneousLine& l, const Eigen::Vector2d& p);

/// Angle between the two lines in [0, pi/2].
double line_angle(const HomogeneousLine& a, const HomogeneousLine& b);

/// Sign-insensitive coefficient comparison.
bool same_line(const HomogeneousLine& a, const HomogeneousLine& b, double tol = 1e-6);

/// Segment of l inside [0,w]x[0,h], as two endpoints, if any.
std::optional<std::pair<Eigen::Vector2d, Eigen::Vector2d>> clip_to_rect(
    const HomogeneousLine& l, double width, double height);

using LinePair = std::pair<HomogeneousLine, HomogeneousLine>;

/// 1D projective map between the pencil of lines around e_A and the pencil
/// around e_B. Each pencil is coordinatized by intersecting its lines with a
/// fixed reference line (an image boundary edge not through the epipole).
class PencilHomography {
 public:
  PencilHomography(const Eigen::Matrix2d& m, HomogeneousPoint e_A, HomogeneousPoint e_B,
                   HomogeneousLine ref_A, HomogeneousLine ref_B);

  HomogeneousLine map(const HomogeneousLine& l_A) const;

  const Eigen::Matrix2d& matrix() const { return m_; }
  const HomogeneousPoint& source_epipole() const { return e_A_; }
  const HomogeneousPoint& target_epipole() const { return e_B_; }
  const HomogeneousLine& reference_A() const { return ref_A_; }
  const HomogeneousLine& reference_B() const { return ref_B_; }

 private:
  Eigen::Matrix2d m_;
  HomogeneousPoint e_A_, e_B_;
  HomogeneousLine ref_A_, ref_B_;
};

/// Image boundary edge farthest from the epipole; never incident to it.
HomogeneousLine choose_reference_line(const HomogeneousPoint& e, double width,
                                      double height);

/// 1D projective coordinate of pencil line l on the reference line.
Eigen::Vector2d pencil_coordinate(const HomogeneousLine& l, const HomogeneousLine& ref);

/// Line of the pencil around e with the given reference-line coordinate.
HomogeneousLine pencil_line(const Eigen::Vector2d& coord, const HomogeneousPoint& e,
                            const HomogeneousLine& ref);

/// Exact 2x2 fit from three line correspondences through the two epipoles.
/// Image dimensions pick the reference lines.
PencilHomography fit_pencil_homography(const std::array<LinePair, 3>& pairs,
                                       const HomogeneousPoint& e_A,
                                       const HomogeneousPoint& e_B, double width_A,
                                       double height_A, double width_B,
                                       double height_B);

/// Rank-2, Frobenius-normalized fundamental matrix with a fixed sign
/// convention (first entry above 1e-9 in row-major order is positive).
class FundamentalMatrix {
 public:
  static FundamentalMatrix from_matrix(const Eigen::Matrix3d& m);

  /// Trusts m to already be rank-2 and normalized; used when reloading a
  /// serialized matrix so round trips are bit-exact.
  static FundamentalMatrix from_normalized(const Eigen::Matrix3d& m) {
    return FundamentalMatrix(m);
  }

  const Eigen::Matrix3d& matrix() const { return f_; }
  HomogeneousLine epipolar_line_in_B(const HomogeneousPoint& p_A) const;
  HomogeneousLine epipolar_line_in_A(const HomogeneousPoint& p_B) const;

  /// Left/right null vectors as points.
  HomogeneousPoint epipole_A() const;
  HomogeneousPoint epipole_B() const;

 private:
  explicit FundamentalMatrix(Eigen::Matrix3d f) : f_(std::move(f)) {}
  Eigen::Matrix3d f_;
};

/// Builds F from the epipoles and >=3 corresponding epipolar line pairs by a
/// least-squares stack of incidence constraints, then enforces rank 2.
FundamentalMatrix assemble_fundamental(const HomogeneousPoint& e_A,
                                       const HomogeneousPoint& e_B,
                                       const std::vector<LinePair>& pairs);

double symmetric_epipolar_distance(
    const FundamentalMatrix& F,
    const std::vector<std::pair<HomogeneousPoint, HomogeneousPoint>>& matches);

/// Area (px^2) between l and l_ref over the image width, with l translated
/// parallel to itself so the two lines meet on the central vertical line.
double area_measure(const HomogeneousLine& l, const HomogeneousLine& l_ref,
                    double image_width, double image_height);

/// Pencil line through e crossing the central vertical line where l does.
HomogeneousLine nearest_pencil_line(const HomogeneousLine& l, const HomogeneousPoint& e,
                                    double width, double height);

/// Inlier test: area against the nearest pencil line below 3 * width.
bool area_inlier(const HomogeneousLine& l, const HomogeneousPoint& e, double width,
                 double height);

}  // namespace epiline
