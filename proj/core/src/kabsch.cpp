#include "augmotion/kabsch.hpp"

#include <cmath>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "augmotion/error.hpp"

namespace augmotion {

namespace {

// Relative rank threshold on the second singular value of H.
constexpr double kRankTolerance = 1e-10;

Vec3 centroid(std::span<const Vec3> pts) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

}  // namespace

Mat3 CrossCovarianceSvd::rotation() const {
  return v * Vec3(1.0, 1.0, d).asDiagonal() * u.transpose();
}

CrossCovarianceSvd cross_covariance_svd(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.size() != b.size())
    throw Error(ErrorKind::kShapeMismatch, "point sets differ in size (" +
                                               std::to_string(a.size()) + " vs " +
                                               std::to_string(b.size()) + ")");
  if (a.size() < 3) throw Error(ErrorKind::kInvalidArgument, "need at least 3 point pairs");
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!a[k].allFinite() || !b[k].allFinite())
      throw Error(ErrorKind::kNonFinite, "non-finite point at index " + std::to_string(k));
  }

  CrossCovarianceSvd out;
  out.centroid_a = centroid(a);
  out.centroid_b = centroid(b);

  Mat3 h = Mat3::Zero();
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Vec3 pa = a[k] - out.centroid_a;
    const Vec3 pb = b[k] - out.centroid_b;
    h += pa * pb.transpose();
    out.centred_sq_norm_a += pa.squaredNorm();
  }

  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.u = svd.matrixU();
  out.v = svd.matrixV();
  out.singular_values = svd.singularValues();
  const double s0 = out.singular_values[0];
  if (!(s0 > 0.0) || out.singular_values[1] <= kRankTolerance * s0)
    throw Error(ErrorKind::kDegenerate,
                "cross-covariance has rank < 2 (collinear or coincident points)");
  out.d = (out.v * out.u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return out;
}

RigidTransform kabsch(std::span<const Vec3> a, std::span<const Vec3> b) {
  const auto svd = cross_covariance_svd(a, b);
  RigidTransform t;
  t.rotation = svd.rotation();
  t.translation = svd.centroid_b - t.rotation * svd.centroid_a;
  return t;
}

double rmsd(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::kShapeMismatch, "point sets differ in size");
  if (a.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += (a[k] - b[k]).squaredNorm();
  return std::sqrt(sum / static_cast<double>(a.size()));
}

}  // namespace augmotion
