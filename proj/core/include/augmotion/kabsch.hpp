#pragma once

#include <span>

#include "augmotion/skeleton.hpp"

namespace augmotion {

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

/// SVD of the cross-covariance H = sum_k a_k b_k^T of two centred point sets,
/// with the reflection guard d = sign(det(V U^T)). Shared by kabsch() and the
/// Procrustes metrics.
struct CrossCovarianceSvd {
  Mat3 u;
  Vec3 singular_values;  // descending
  Mat3 v;
  double d = 1.0;
  Vec3 centroid_a;
  Vec3 centroid_b;
  double centred_sq_norm_a = 0.0;  // sum |a_k - centroid_a|^2

  /// V diag(1, 1, d) U^T
  Mat3 rotation() const;
};

/// Throws kShapeMismatch on size mismatch, kInvalidArgument for n < 3 and
/// kDegenerate when H has rank < 2 (collinear input).
CrossCovarianceSvd cross_covariance_svd(std::span<const Vec3> a, std::span<const Vec3> b);

/// Proper rotation R and translation t minimising RMSD(R a + t, b).
RigidTransform kabsch(std::span<const Vec3> a, std::span<const Vec3> b);

double rmsd(std::span<const Vec3> a, std::span<const Vec3> b);

}  // namespace augmotion
