#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "augmotion/kabsch.hpp"
#include "augmotion/skeleton.hpp"

namespace augmotion {

/// Corpus-wide reference distances: mean shoulder span and mean
/// shoulder-midpoint-to-pubis distance over every frame of every sequence.
struct ScaleRatios {
  double m_s = 0.0;
  double m_sp = 0.0;
  std::size_t n_frames_used = 0;

  double ratio() const { return m_sp / m_s; }
};

ScaleRatios compute_scale_ratios(std::span<const PoseSequence> sequences);

/// Left shoulder, right shoulder, pubis of the universal coordinate system.
std::array<Vec3, 3> canonical_reference_targets();

/// Reference triple (left shoulder, right shoulder, pubis) of one frame.
std::array<Vec3, 3> reference_points(const PoseFrame& frame, const SkeletonTopology& topology);

/// cos of the angle between pubis->shoulder-midpoint and `up_axis`.
/// Throws kDegenerate when the two points coincide.
double uprightness_feature(const PoseFrame& frame, const SkeletonTopology& topology,
                           const Vec3& up_axis = Vec3::UnitZ());

inline constexpr std::size_t kKeyFrameClusters = 3;

struct KeyFrameResult {
  std::size_t frame_index = 0;  // position in seq.frames
  /// Cluster sizes ordered by ascending centroid; zero-padded to three entries.
  std::array<std::size_t, kKeyFrameClusters> cluster_sizes{};
  std::vector<double> feature_values;
  double centroid = 0.0;  // centroid of the chosen cluster
};

/// Cluster choice given features and any labelling: largest cluster, then
/// higher mean feature, then lowest member index; inside it, the member nearest
/// the cluster mean (lowest index on ties). Independent of label numbering.
KeyFrameResult pick_key_frame(std::span<const double> features,
                              std::span<const std::size_t> assignments);

/// k-means (k = 3, or fewer for very short sequences) on per-frame
/// uprightness, then pick_key_frame.
KeyFrameResult select_key_frame(const PoseSequence& seq, std::uint64_t seed = 0);

struct HarmonizeResult {
  PoseSequence sequence;  // units = "universal"
  double scale = 1.0;
  RigidTransform transform;  // applied after scaling: p' = R (s p) + t
  std::size_t key_frame = 0;
  double key_frame_rmsd = 0.0;  // residual of the triple fit, universal units
};

/// Uniform scale so the key frame's shoulder span matches the targets', one
/// Kabsch fit of the scaled key-frame triple onto `targets`, and that single
/// similarity applied to every frame.
HarmonizeResult harmonize_sequence(const PoseSequence& seq, std::size_t key_frame,
                                   const std::array<Vec3, 3>& targets =
                                       canonical_reference_targets());

}  // namespace augmotion
