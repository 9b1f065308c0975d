#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "augmotion/skeleton.hpp"

namespace augmotion {

/// Axis-aligned grid of w x h x d voxels; densities are sampled at voxel
/// centres. Flat index is x-fastest: x + w * (y + h * z).
struct VolumeSpec {
  std::array<std::size_t, 3> dims{64, 64, 64};
  Vec3 lower = Vec3::Zero();
  Vec3 upper = Vec3::Ones();

  /// Throws kInvalidArgument unless dims > 0 and upper > lower componentwise.
  void validate() const;
  Vec3 voxel_edge() const;
  std::size_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }
  std::size_t flat_index(std::size_t x, std::size_t y, std::size_t z) const {
    return x + dims[0] * (y + dims[1] * z);
  }
  Vec3 voxel_center(std::size_t x, std::size_t y, std::size_t z) const;
  bool contains(const Vec3& p) const;
  /// Voxel holding `p`, clamped to the grid.
  std::array<std::size_t, 3> voxel_of(const Vec3& p) const;
  double voxel_diagonal() const { return voxel_edge().norm(); }

  friend bool operator==(const VolumeSpec&, const VolumeSpec&) = default;
};

inline constexpr double kDefaultSigmaVoxels = 1.5;
inline constexpr double kDefaultPadSigmas = 4.0;

/// Cubic voxels sized so the frames' bounding box, padded by
/// `pad_sigmas * sigma_voxels` voxels per side, fills the grid. The matching
/// sigma_main is `sigma_voxels * spec.voxel_edge().x()`.
VolumeSpec default_volume_spec(std::span<const PoseFrame> frames,
                               std::array<std::size_t, 3> dims = {64, 64, 64},
                               double sigma_voxels = kDefaultSigmaVoxels,
                               double pad_sigmas = kDefaultPadSigmas);

/// Cubic voxels sized so the bounding box padded by `pad` world units per side
/// fills the grid.
VolumeSpec padded_volume_spec(std::span<const PoseFrame> frames, std::array<std::size_t, 3> dims,
                              double pad);

/// Isotropic normal distribution N(mu, sigma^2 I) in three dimensions.
struct GaussianComponent {
  Vec3 mu = Vec3::Zero();
  double sigma = 1.0;

  double density(const Vec3& x) const;
};

/// How side components are assigned widths along a bone.
///  kSquaredIndex: transitional point i gets side_sigma(i) (first side as
///    narrow as the main component).
///  kAfterMain: transitional point i gets side_sigma(i + 1), the main component
///    being the i = 1 term, so every side is strictly wider than the main one
///    and the main voxel stays the unique maximum for end joints.
enum class SideSchedule { kSquaredIndex, kAfterMain };

struct HeatParams {
  double sigma_main = 1.0;
  double c = 2.0;  // spacing of transitional points
  SideSchedule schedule = SideSchedule::kAfterMain;

  void validate() const;
};

/// floor(D / c): number of transitional points that fit on a bone.
std::size_t side_count(const Vec3& target, const Vec3& adjacent, double c);

/// Points at distance c, 2c, ... from `target` toward `adjacent`.
std::vector<Vec3> transitional_points(const Vec3& target, const Vec3& adjacent, double c);

/// i^2 * sigma_main
double side_sigma(std::size_t i, double sigma_main);

struct KeypointMixture {
  JointId target_joint;
  GaussianComponent main;
  /// Ordered by adjacent joint index, then by transitional index.
  std::vector<GaussianComponent> sides;
  std::vector<std::size_t> side_adjacent;  // adjacent joint of each side
  std::vector<std::size_t> side_rank;      // transitional index i (1-based)

  /// Unnormalised mixture density: main + sum of sides.
  double density(const Vec3& x) const;
};

KeypointMixture build_mixture(const PoseFrame& frame, const SkeletonTopology& topology,
                              const JointId& joint, const HeatParams& params);

enum class VolumeMode { kChannel, kFused };

std::string_view to_string(VolumeMode mode) noexcept;
VolumeMode volume_mode_from_string(std::string_view text);

/// Voxel probabilities. Channel mode holds one grid per joint; fused mode a
/// single grid with every joint's mixture summed before normalisation.
class HeatVolume {
 public:
  HeatVolume(VolumeSpec spec, VolumeMode mode, std::vector<std::string> joint_names,
             std::vector<std::vector<double>> channels);

  const VolumeSpec& spec() const noexcept { return spec_; }
  VolumeMode mode() const noexcept { return mode_; }
  const std::vector<std::string>& joint_names() const noexcept { return joint_names_; }
  std::size_t channel_count() const noexcept { return channels_.size(); }
  std::span<const double> channel(std::size_t c) const { return channels_.at(c); }
  double at(std::size_t c, std::size_t x, std::size_t y, std::size_t z) const {
    return channels_[c][spec_.flat_index(x, y, z)];
  }

 private:
  VolumeSpec spec_;
  VolumeMode mode_;
  std::vector<std::string> joint_names_;
  std::vector<std::vector<double>> channels_;
};

/// Rasterises the frame's mixtures at voxel centres and divides each grid by
/// its maximum. Throws kOutOfBounds naming the first joint outside the volume and
/// kInvalidArgument when sigma_main is below half a voxel edge.
HeatVolume encode(const PoseFrame& frame, const SkeletonTopology& topology, const VolumeSpec& spec,
                  const HeatParams& params, VolumeMode mode = VolumeMode::kChannel);

/// Argmax voxel of every channel refined by the value-weighted centroid of its
/// clipped 3x3x3 neighbourhood. Channel mode only.
std::vector<Vec3> decode(const HeatVolume& volume);

inline constexpr double kCrossEntropyEpsilon = 1e-12;

/// Mean over channels of -sum t log(p + eps), both channels normalised to sum 1.
double cross_entropy_loss(const HeatVolume& pred, const HeatVolume& target);
/// The same functional with pred = target, i.e. the loss floor.
double heat_entropy(const HeatVolume& target);
/// Mean squared voxel difference over all channels.
double mse_loss(const HeatVolume& pred, const HeatVolume& target);

}  // namespace augmotion
