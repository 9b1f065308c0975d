#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "augmotion/skeleton.hpp"

namespace augmotion {

/// Parameters of the procedural walker used as ground truth throughout the
/// test suite. Lengths are millimetres, angles radians.
struct SynthSpec {
  std::uint64_t seed = 0;
  std::size_t frame_count = 64;
  double fps = 50.0;
  double cycle_hz = 1.0;
  /// Peak hip/shoulder swing; knees and elbows flex by up to the same angle.
  double limb_amplitude = 0.5;
  /// Peak forward bend of the upper body about the pelvis.
  double torso_amplitude = 0.6;
  Vec3 drift = Vec3::Zero();  // mm/s
  double noise_sigma = 0.0;   // mm, iid per coordinate
};

/// Parent-relative rest offsets in the body frame (x right, y forward, z up),
/// indexed like SkeletonTopology::h36m17(); the pelvis entry is its height.
const std::vector<Vec3>& synthetic_rest_offsets();
/// Parent of each joint in the generator's tree (pelvis maps to itself).
const std::vector<std::size_t>& synthetic_parents();

/// Upper-body bend (radians from vertical) at `frame`. Zero at the frame the
/// generator picks as its upright anchor.
double synthetic_torso_tilt(const SynthSpec& spec, std::size_t frame);
/// The frame index where the torso is exactly upright.
std::size_t synthetic_upright_frame(const SynthSpec& spec);
/// Pelvis position before noise.
Vec3 synthetic_root_position(const SynthSpec& spec, std::size_t frame);

/// Deterministic for a given spec. Throws kInvalidArgument on frame_count == 0,
/// negative noise or non-positive fps.
PoseSequence generate_synthetic(const SynthSpec& spec);

}  // namespace augmotion
