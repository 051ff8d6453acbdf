#include "epiline/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace epiline {

namespace {

constexpr double kNullCross = 1e-12;

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

}  // namespace

HomogeneousPoint HomogeneousPoint::from_homogeneous(const Eigen::Vector3d& v) {
  const double xy = v.head<2>().norm();
  if (xy == 0.0 && v.z() == 0.0) throw CoincidentPoints("null homogeneous point");
  if (std::abs(v.z()) <= kNullCross * xy) {
    return HomogeneousPoint(Eigen::Vector3d(v.x() / xy, v.y() / xy, 0.0));
  }
  return HomogeneousPoint(Eigen::Vector3d(v.x() / v.z(), v.y() / v.z(), 1.0));
}

HomogeneousPoint HomogeneousPoint::at_infinity(double dx, double dy) {
  const double n = std::hypot(dx, dy);
  if (n == 0.0) throw CoincidentPoints("null direction");
  return HomogeneousPoint(Eigen::Vector3d(dx / n, dy / n, 0.0));
}

HomogeneousLine::HomogeneousLine(double a, double b, double c) {
  const double n = std::hypot(a, b);
  if (!(n > 0.0) || !std::isfinite(n))
    throw IdenticalLines("line with null normal");
  l_ = Eigen::Vector3d(a / n, b / n, c / n);
  if (l_.x() < 0.0 || (l_.x() == 0.0 && l_.y() < 0.0)) l_ = -l_;
}

HomogeneousLine HomogeneousLine::from_coeffs(const Eigen::Vector3d& l) {
  return HomogeneousLine(l.x(), l.y(), l.z());
}

HomogeneousLine line_through(const HomogeneousPoint& p, const HomogeneousPoint& q) {
  const Eigen::Vector3d c = p.vec().cross(q.vec());
  if (c.norm() < kNullCross) throw CoincidentPoints();
  if (c.head<2>().norm() < kNullCross * std::abs(c.z()))
    throw CoincidentPoints("line at infinity");
  return HomogeneousLine::from_coeffs(c);
}

HomogeneousPoint intersect(const HomogeneousLine& l1, const HomogeneousLine& l2) {
  const Eigen::Vector3d c = l1.coeffs().cross(l2.coeffs());
  if (c.norm() < kNullCross) throw IdenticalLines();
  return HomogeneousPoint::from_homogeneous(c);
}

double signed_distance(const HomogeneousLine& l, const HomogeneousPoint& p) {
  if (p.infinite()) throw InfinitePoint();
  return l.coeffs().dot(p.vec());
}

Eigen::Vector2d closest_point(const HomogeneousLine& l, const Eigen::Vector2d& p) {
  const double d = l.coeffs().dot(Eigen::Vector3d(p.x(), p.y(), 1.0));
  return p - d * l.normal();
}

double line_angle(const HomogeneousLine& a, const HomogeneousLine& b) {
  const double c = std::min(1.0, std::abs(a.normal().dot(b.normal())));
  return std::acos(c);
}

bool same_line(const HomogeneousLine& a, const HomogeneousLine& b, double tol) {
  const Eigen::Vector3d d1 = a.coeffs() - b.coeffs();
  const Eigen::Vector3d d2 = a.coeffs() + b.coeffs();
  return d1.lpNorm<Eigen::Infinity>() < tol || d2.lpNorm<Eigen::Infinity>() < tol;
}

std::optional<std::pair<Eigen::Vector2d, Eigen::Vector2d>> clip_to_rect(
    const HomogeneousLine& l, double width, double height) {
  // Liang-Barsky on p(t) = base + t * dir.
  const Eigen::Vector2d dir = l.direction();
  const Eigen::Vector2d base = -l.coeffs().z() * l.normal();
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  const double px[2] = {-dir.x(), dir.x()};
  const double py[2] = {-dir.y(), dir.y()};
  const double qx[2] = {base.x() - 0.0, width - base.x()};
  const double qy[2] = {base.y() - 0.0, height - base.y()};
  const double p[4] = {px[0], px[1], py[0], py[1]};
  const double q[4] = {qx[0], qx[1], qy[0], qy[1]};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return std::nullopt;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0)
      t0 = std::max(t0, t);
    else
      t1 = std::min(t1, t);
  }
  if (t0 > t1) return std::nullopt;
  return std::make_pair(Eigen::Vector2d(base + t0 * dir), Eigen::Vector2d(base + t1 * dir));
}

PencilHomography::PencilHomography(const Eigen::Matrix2d& m, HomogeneousPoint e_A,
                                   HomogeneousPoint e_B, HomogeneousLine ref_A,
                                   HomogeneousLine ref_B)
    : m_(m),
      e_A_(std::move(e_A)),
      e_B_(std::move(e_B)),
      ref_A_(std::move(ref_A)),
      ref_B_(std::move(ref_B)) {
  if (std::abs(m_.determinant()) < 1e-15)
    throw DegeneratePencil("singular pencil homography");
}

HomogeneousLine choose_reference_line(const HomogeneousPoint& e, double width,
                                      double height) {
  const HomogeneousLine edges[4] = {
      HomogeneousLine(1, 0, 0),        // x = 0
      HomogeneousLine(1, 0, -width),   // x = w
      HomogeneousLine(0, 1, 0),        // y = 0
      HomogeneousLine(0, 1, -height),  // y = h
  };
  int best = 0;
  double best_d = -1.0;
  for (int i = 0; i < 4; ++i) {
    // |l . e| works for both finite points (pixel distance) and directions.
    const double d = std::abs(edges[i].coeffs().dot(e.vec()));
    if (d > best_d) {
      best_d = d;
      best = i;
    }
  }
  return edges[best];
}

Eigen::Vector2d pencil_coordinate(const HomogeneousLine& l, const HomogeneousLine& ref) {
  const Eigen::Vector3d x = l.coeffs().cross(ref.coeffs());
  if (x.norm() < kNullCross) throw DegeneratePencil("pencil line equals reference");
  // Basis on ref: b0 = finite point closest to origin, b1 = direction.
  const Eigen::Vector2d base = -ref.coeffs().z() * ref.normal();
  const Eigen::Vector2d dir = ref.direction();
  Eigen::Matrix<double, 3, 2> basis;
  basis << base.x(), dir.x(), base.y(), dir.y(), 1.0, 0.0;
  Eigen::Vector2d u = basis.colPivHouseholderQr().solve(x);
  const double n = u.norm();
  if (!(n > 0.0)) throw DegeneratePencil("null pencil coordinate");
  return u / n;
}

HomogeneousLine pencil_line(const Eigen::Vector2d& coord, const HomogeneousPoint& e,
                            const HomogeneousLine& ref) {
  const Eigen::Vector2d base = -ref.coeffs().z() * ref.normal();
  const Eigen::Vector2d dir = ref.direction();
  const Eigen::Vector3d x(coord.x() * base.x() + coord.y() * dir.x(),
                          coord.x() * base.y() + coord.y() * dir.y(), coord.x());
  return line_through(e, HomogeneousPoint::from_homogeneous(x));
}

HomogeneousLine PencilHomography::map(const HomogeneousLine& l_A) const {
  const Eigen::Vector2d u = pencil_coordinate(l_A, ref_A_);
  return pencil_line(m_ * u, e_B_, ref_B_);
}

PencilHomography fit_pencil_homography(const std::array<LinePair, 3>& pairs,
                                       const HomogeneousPoint& e_A,
                                       const HomogeneousPoint& e_B, double width_A,
                                       double height_A, double width_B,
                                       double height_B) {
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      if (line_angle(pairs[i].first, pairs[j].first) < 1e-6) throw DegeneratePencil();
      if (line_angle(pairs[i].second, pairs[j].second) < 1e-6) throw DegeneratePencil();
    }
  const HomogeneousLine ref_A = choose_reference_line(e_A, width_A, height_A);
  const HomogeneousLine ref_B = choose_reference_line(e_B, width_B, height_B);

  Eigen::Matrix<double, 3, 4> sys;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2d u = pencil_coordinate(pairs[i].first, ref_A);
    const Eigen::Vector2d v = pencil_coordinate(pairs[i].second, ref_B);
    // v x (M u) = 0, unknowns (m00, m01, m10, m11)
    sys.row(i) << v.y() * u.x(), v.y() * u.y(), -v.x() * u.x(), -v.x() * u.y();
  }
  const Eigen::JacobiSVD<Eigen::Matrix<double, 3, 4>> svd(sys, Eigen::ComputeFullV);
  const Eigen::Vector4d m = svd.matrixV().col(3);
  Eigen::Matrix2d M;
  M << m(0), m(1), m(2), m(3);
  return PencilHomography(M, e_A, e_B, ref_A, ref_B);
}

FundamentalMatrix FundamentalMatrix::from_matrix(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d s = svd.singularValues();
  s.z() = 0.0;
  Eigen::Matrix3d f = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  const double n = f.norm();
  if (!(n > 0.0)) throw RankDeficientSystem("null fundamental matrix");
  f /= n;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      if (std::abs(f(r, c)) > 1e-9) {
        if (f(r, c) < 0.0) f = -f;
        return FundamentalMatrix(f);
      }
    }
  return FundamentalMatrix(f);
}

HomogeneousLine FundamentalMatrix::epipolar_line_in_B(const HomogeneousPoint& p_A) const {
  return HomogeneousLine::from_coeffs(f_ * p_A.vec());
}

HomogeneousLine FundamentalMatrix::epipolar_line_in_A(const HomogeneousPoint& p_B) const {
  return HomogeneousLine::from_coeffs(f_.transpose() * p_B.vec());
}

HomogeneousPoint FundamentalMatrix::epipole_A() const {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(f_, Eigen::ComputeFullV);
  return HomogeneousPoint::from_homogeneous(svd.matrixV().col(2));
}

HomogeneousPoint FundamentalMatrix::epipole_B() const {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(f_, Eigen::ComputeFullU);
  return HomogeneousPoint::from_homogeneous(svd.matrixU().col(2));
}

FundamentalMatrix assemble_fundamental(const HomogeneousPoint& e_A,
                                       const HomogeneousPoint& e_B,
                                       const std::vector<LinePair>& pairs) {
  // Condition by rescaling coordinates about the sample centroid.
  std::vector<Eigen::Vector3d> samples_A;
  std::vector<Eigen::Vector3d> lines_B;
  for (const auto& [l_A, l_B] : pairs) {
    const Eigen::Vector2d base = -l_A.coeffs().z() * l_A.normal();
    const Eigen::Vector2d dir = l_A.direction();
    const double span = 500.0;
    samples_A.emplace_back(base.x() - span * dir.x(), base.y() - span * dir.y(), 1.0);
    samples_A.emplace_back(base.x() + span * dir.x(), base.y() + span * dir.y(), 1.0);
    lines_B.push_back(l_B.coeffs());
  }
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : samples_A) centroid += p.head<2>();
  centroid /= static_cast<double>(samples_A.size());
  double scale = 0.0;
  for (const auto& p : samples_A) scale += (p.head<2>() - centroid).norm();
  scale = samples_A.size() * std::sqrt(2.0) / std::max(scale, 1e-9);
  Eigen::Matrix3d T_A = Eigen::Matrix3d::Identity();
  T_A(0, 0) = T_A(1, 1) = scale;
  T_A(0, 2) = -scale * centroid.x();
  T_A(1, 2) = -scale * centroid.y();
  // Image B conditioning: identical recipe on the B lines' closest points.
  Eigen::Vector2d centroid_B = Eigen::Vector2d::Zero();
  for (const auto& l : lines_B) centroid_B += Eigen::Vector2d(-l.z() * l.x(), -l.z() * l.y());
  centroid_B /= static_cast<double>(lines_B.size());
  double scale_B = 0.0;
  for (const auto& l : lines_B)
    scale_B += (Eigen::Vector2d(-l.z() * l.x(), -l.z() * l.y()) - centroid_B).norm() + 500.0;
  scale_B = lines_B.size() * std::sqrt(2.0) / std::max(scale_B, 1e-9);
  Eigen::Matrix3d T_B = Eigen::Matrix3d::Identity();
  T_B(0, 0) = T_B(1, 1) = scale_B;
  T_B(0, 2) = -scale_B * centroid_B.x();
  T_B(1, 2) = -scale_B * centroid_B.y();

  const Eigen::Vector3d eA_n = (T_A * e_A.vec()).normalized();
  const Eigen::Vector3d eB_n = (T_B * e_B.vec()).normalized();

  const auto row_of = [](const Eigen::Vector3d& left, const Eigen::Vector3d& right) {
    // Row of the 9-vector system for left^T F right = 0 with F row-major.
    Eigen::Matrix<double, 1, 9> r;
    r << left.x() * right.x(), left.x() * right.y(), left.x() * right.z(),
        left.y() * right.x(), left.y() * right.y(), left.y() * right.z(),
        left.z() * right.x(), left.z() * right.y(), left.z() * right.z();
    return r;
  };

  std::vector<Eigen::Matrix<double, 1, 9>> rows;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Eigen::Vector3d lB = (T_B.inverse().transpose() * lines_B[i]).normalized();
    for (int k = 0; k < 2; ++k) {
      Eigen::Vector3d x = T_A * samples_A[2 * i + k];
      x /= x.norm();
      // [l_B]_x F x = 0 : three rows, rank 2.
      const Eigen::Matrix3d sk = skew(lB);
      for (int r = 0; r < 3; ++r) rows.push_back(row_of(sk.row(r).transpose(), x));
    }
  }
  // F e_A = 0: one row per output row r.
  for (int r = 0; r < 3; ++r) rows.push_back(row_of(Eigen::Vector3d::Unit(r), eA_n));
  // e_B^T F = 0: one row per column c: sum_r eB(r) F(r,c) = 0.
  for (int c = 0; c < 3; ++c) {
    Eigen::Matrix<double, 1, 9> row = Eigen::Matrix<double, 1, 9>::Zero();
    for (int r = 0; r < 3; ++r) row(3 * r + c) = eB_n(r);
    rows.push_back(row);
  }

  Eigen::MatrixXd A(static_cast<int>(rows.size()), 9);
  for (std::size_t i = 0; i < rows.size(); ++i) A.row(static_cast<int>(i)) = rows[i];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > sv(0) * 1e-8) ++rank;
  if (rank < 8) throw RankDeficientSystem();
  const Eigen::Matrix<double, 9, 1> f = svd.matrixV().col(8);
  Eigen::Matrix3d Fn;
  Fn << f(0), f(1), f(2), f(3), f(4), f(5), f(6), f(7), f(8);
  const Eigen::Matrix3d F = T_B.transpose() * Fn * T_A;
  return FundamentalMatrix::from_matrix(F);
}

double symmetric_epipolar_distance(
    const FundamentalMatrix& F,
    const std::vector<std::pair<HomogeneousPoint, HomogeneousPoint>>& matches) {
  if (matches.empty()) throw EmptyMatches();
  double sum = 0.0;
  for (const auto& [p_A, p_B] : matches) {
    const double d1 = std::abs(signed_distance(F.epipolar_line_in_B(p_A), p_B));
    const double d2 = std::abs(signed_distance(F.epipolar_line_in_A(p_B), p_A));
    sum += 0.5 * (d1 + d2);
  }
  return sum / static_cast<double>(matches.size());
}

namespace {

// y of l at x, requiring a non-vertical line.
std::optional<double> y_at(const HomogeneousLine& l, double x) {
  const Eigen::Vector3d& c = l.coeffs();
  if (std::abs(c.y()) < 1e-12) return std::nullopt;
  return -(c.x() * x + c.z()) / c.y();
}

}  // namespace

double area_measure(const HomogeneousLine& l, const HomogeneousLine& l_ref,
                    double image_width, double image_height) {
  const double cx = image_width / 2.0;
  const auto y1 = y_at(l, cx);
  const auto y2 = y_at(l_ref, cx);
  if (!y1 || !y2 || *y1 < 0.0 || *y1 > image_height || *y2 < 0.0 || *y2 > image_height)
    throw OutOfFrame();
  // After translating l so both lines meet at (cx, y_ref), the gap is
  // |dslope| * |x - cx|; integrating over [0, w] gives |dslope| * (w/2)^2.
  const double s1 = -l.coeffs().x() / l.coeffs().y();
  const double s2 = -l_ref.coeffs().x() / l_ref.coeffs().y();
  return std::abs(s1 - s2) * (image_width / 2.0) * (image_width / 2.0);
}

HomogeneousLine nearest_pencil_line(const HomogeneousLine& l, const HomogeneousPoint& e,
                                    double width, double height) {
  const double cx = width / 2.0;
  const auto y0 = y_at(l, cx);
  if (!y0 || *y0 < 0.0 || *y0 > height) throw OutOfFrame();
  return line_through(e, HomogeneousPoint(cx, *y0));
}

bool area_inlier(const HomogeneousLine& l, const HomogeneousPoint& e, double width,
                 double height) {
  try {
    const HomogeneousLine ref = nearest_pencil_line(l, e, width, height);
    return area_measure(l, ref, width, height) < 3.0 * width;
  } catch (const OutOfFrame&) {
    return false;
  } catch (const CoincidentPoints&) {
    // Epipole on the line's central crossing: the line is in the pencil.
    return true;
  }
}

}  // namespace epiline
