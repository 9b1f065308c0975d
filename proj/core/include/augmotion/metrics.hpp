#pragma once

#include <span>
#include <string>
#include <vector>

#include "augmotion/skeleton.hpp"

namespace augmotion {

struct SimilarityTransform {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
};

/// Mean Euclidean distance between corresponding joints.
double mpjpe(std::span<const Vec3> pred, std::span<const Vec3> gt);
double mpjpe(const PoseFrame& pred, const PoseFrame& gt);

/// Least-squares similarity taking `pred` onto `gt` (rotation from the shared
/// Kabsch SVD, closed-form scale trace(S D) / |pred - mean|^2).
SimilarityTransform procrustes_align(std::span<const Vec3> pred, std::span<const Vec3> gt);

/// MPJPE after procrustes_align.
double p_mpjpe(std::span<const Vec3> pred, std::span<const Vec3> gt);
double p_mpjpe(const PoseFrame& pred, const PoseFrame& gt);

struct FrameScore {
  std::size_t frame_index = 0;
  double mpjpe = 0.0;
  double p_mpjpe = 0.0;
};

struct EvalReport {
  double mpjpe = 0.0;    // unweighted mean over frames
  double p_mpjpe = 0.0;
  std::string units;
  std::vector<FrameScore> per_frame;
};

/// Pairs frames by frame_index; every predicted frame must exist in `gt`.
/// Throws kShapeMismatch on differing joint layouts or units.
EvalReport evaluate_sequences(const PoseSequence& pred, const PoseSequence& gt);

}  // namespace augmotion
