#include "augmotion/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "augmotion/error.hpp"

namespace augmotion {

namespace {

// h36m17 indices
enum : std::size_t {
  kPelvis, kRightHip, kRightKnee, kRightAnkle, kLeftHip, kLeftKnee, kLeftAnkle, kSpine, kNeck,
  kHead, kHeadTop, kLeftShoulder, kLeftElbow, kLeftWrist, kRightShoulder, kRightElbow, kRightWrist,
  kJointCount
};

Mat3 rot_x(double angle) { return Eigen::AngleAxisd(angle, Vec3::UnitX()).toRotationMatrix(); }
Mat3 rot_z(double angle) { return Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix(); }

// Per-sequence random draws; fixed order so a seed always means the same walker.
struct Draws {
  double heading = 0.0;
  double phase = 0.0;
  Vec3 start = Vec3::Zero();
  std::size_t upright_frame = 0;
};

Draws draw(const SynthSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Draws d;
  d.heading = 2.0 * std::numbers::pi * unit(rng);
  d.phase = 2.0 * std::numbers::pi * unit(rng);
  d.start = Vec3(1000.0 * unit(rng) - 500.0, 1000.0 * unit(rng) - 500.0, 0.0);
  d.upright_frame = std::min<std::size_t>(
      static_cast<std::size_t>(unit(rng) * static_cast<double>(spec.frame_count)),
      spec.frame_count - 1);
  return d;
}

void check(const SynthSpec& spec) {
  if (spec.frame_count == 0) throw Error(ErrorKind::kInvalidArgument, "frame_count must be >= 1");
  if (!(spec.fps > 0.0)) throw Error(ErrorKind::kInvalidArgument, "fps must be positive");
  if (!(spec.noise_sigma >= 0.0))
    throw Error(ErrorKind::kInvalidArgument, "noise_sigma must be non-negative");
  if (!(spec.cycle_hz >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "cycle_hz must be >= 0");
}

double tilt_at(const SynthSpec& spec, const Draws& d, std::size_t frame) {
  const double t = (static_cast<double>(frame) - static_cast<double>(d.upright_frame)) / spec.fps;
  const double s = std::sin(std::numbers::pi * spec.cycle_hz * t);
  return spec.torso_amplitude * s * s;
}

}  // namespace

const std::vector<Vec3>& synthetic_rest_offsets() {
  // Shoulder span 360 and shoulder-midpoint-to-pelvis 450 keep the reference
  // triangle similar to the canonical targets (2 : 2.5).
  static const std::vector<Vec3> offsets = {
      {0, 0, 920},     // pelvis height
      {130, 0, 0},     {0, 0, -450}, {0, 0, -440},   // right leg
      {-130, 0, 0},    {0, 0, -450}, {0, 0, -440},   // left leg
      {0, 0, 215},     {0, 0, 235},                  // spine, neck
      {0, 0, 120},     {0, 0, 110},                  // head, head_top
      {-180, 0, 0},    {0, 0, -280}, {0, 0, -250},   // left arm
      {180, 0, 0},     {0, 0, -280}, {0, 0, -250}};  // right arm
  return offsets;
}

const std::vector<std::size_t>& synthetic_parents() {
  static const std::vector<std::size_t> parents = {
      kPelvis, kPelvis, kRightHip, kRightKnee, kPelvis, kLeftHip, kLeftKnee, kPelvis, kSpine,
      kNeck,   kHead,   kNeck,     kLeftShoulder, kLeftElbow, kNeck, kRightShoulder, kRightElbow};
  return parents;
}

double synthetic_torso_tilt(const SynthSpec& spec, std::size_t frame) {
  check(spec);
  return tilt_at(spec, draw(spec), frame);
}

std::size_t synthetic_upright_frame(const SynthSpec& spec) {
  check(spec);
  return draw(spec).upright_frame;
}

Vec3 synthetic_root_position(const SynthSpec& spec, std::size_t frame) {
  check(spec);
  const Draws d = draw(spec);
  const double t = static_cast<double>(frame) / spec.fps;
  return d.start + Vec3(0, 0, synthetic_rest_offsets()[kPelvis].z()) + spec.drift * t;
}

PoseSequence generate_synthetic(const SynthSpec& spec) {
  check(spec);
  const Draws d = draw(spec);
  const auto& rest = synthetic_rest_offsets();
  const double omega = 2.0 * std::numbers::pi * spec.cycle_hz;
  const Mat3 heading = rot_z(d.heading);

  std::mt19937_64 noise_rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> noise(0.0, 1.0);

  PoseSequence seq;
  seq.topology = SkeletonTopology::h36m17();
  seq.fps = spec.fps;
  seq.units = std::string(kUnitsMillimetres);
  seq.source_label = "synthetic:seed=" + std::to_string(spec.seed);
  seq.up_axis = Vec3::UnitZ();
  seq.frames.resize(spec.frame_count);

  for (std::size_t f = 0; f < spec.frame_count; ++f) {
    const double t = static_cast<double>(f) / spec.fps;
    const double swing = spec.limb_amplitude * std::sin(omega * t + d.phase);
    const double flex_r = 0.5 * spec.limb_amplitude * (1.0 - std::cos(omega * t + d.phase));
    const double flex_l = 0.5 * spec.limb_amplitude * (1.0 + std::cos(omega * t + d.phase));
    const Mat3 torso = rot_x(tilt_at(spec, d, f));

    // Body-frame positions relative to the pelvis.
    std::vector<Vec3> p(kJointCount, Vec3::Zero());
    auto leg = [&](std::size_t hip, std::size_t knee, std::size_t ankle, double hip_angle,
                   double knee_flex) {
      p[hip] = rest[hip];
      const Mat3 thigh = rot_x(hip_angle);
      p[knee] = p[hip] + thigh * rest[knee];
      p[ankle] = p[knee] + thigh * rot_x(-knee_flex) * rest[ankle];
    };
    leg(kRightHip, kRightKnee, kRightAnkle, swing, flex_r);
    leg(kLeftHip, kLeftKnee, kLeftAnkle, -swing, flex_l);

    p[kSpine] = torso * rest[kSpine];
    p[kNeck] = p[kSpine] + torso * rest[kNeck];
    p[kHead] = p[kNeck] + torso * rest[kHead];
    p[kHeadTop] = p[kHead] + torso * rest[kHeadTop];
    auto arm = [&](std::size_t shoulder, std::size_t elbow, std::size_t wrist, double swing_angle,
                   double elbow_flex) {
      p[shoulder] = p[kNeck] + torso * rest[shoulder];
      const Mat3 upper = torso * rot_x(swing_angle);
      p[elbow] = p[shoulder] + upper * rest[elbow];
      p[wrist] = p[elbow] + upper * rot_x(elbow_flex) * rest[wrist];
    };
    arm(kLeftShoulder, kLeftElbow, kLeftWrist, 0.8 * swing, flex_r);
    arm(kRightShoulder, kRightElbow, kRightWrist, -0.8 * swing, flex_l);

    const Vec3 root = d.start + Vec3(0, 0, rest[kPelvis].z()) + spec.drift * t;
    auto& frame = seq.frames[f];
    frame.frame_index = f;
    frame.coords.resize(kJointCount);
    for (std::size_t j = 0; j < kJointCount; ++j) {
      frame.coords[j] = root + heading * p[j];
      if (spec.noise_sigma > 0.0) {
        for (int k = 0; k < 3; ++k) frame.coords[j][k] += spec.noise_sigma * noise(noise_rng);
      }
    }
  }
  return seq;
}

}  // namespace augmotion
