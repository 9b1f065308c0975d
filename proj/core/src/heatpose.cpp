#include "augmotion/heatpose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "augmotion/error.hpp"

namespace augmotion {

void VolumeSpec::validate() const {
  for (std::size_t k = 0; k < 3; ++k) {
    if (dims[k] == 0) throw Error(ErrorKind::kInvalidArgument, "volume dims must be positive");
    if (!std::isfinite(lower[k]) || !std::isfinite(upper[k]) || !(upper[k] > lower[k]))
      throw Error(ErrorKind::kInvalidArgument, "volume upper bound must exceed lower bound");
  }
}

Vec3 VolumeSpec::voxel_edge() const {
  return Vec3((upper.x() - lower.x()) / static_cast<double>(dims[0]),
              (upper.y() - lower.y()) / static_cast<double>(dims[1]),
              (upper.z() - lower.z()) / static_cast<double>(dims[2]));
}

Vec3 VolumeSpec::voxel_center(std::size_t x, std::size_t y, std::size_t z) const {
  const Vec3 edge = voxel_edge();
  return lower + Vec3((static_cast<double>(x) + 0.5) * edge.x(),
                      (static_cast<double>(y) + 0.5) * edge.y(),
                      (static_cast<double>(z) + 0.5) * edge.z());
}

bool VolumeSpec::contains(const Vec3& p) const {
  for (int k = 0; k < 3; ++k)
    if (!(p[k] >= lower[k] && p[k] <= upper[k])) return false;
  return true;
}

std::array<std::size_t, 3> VolumeSpec::voxel_of(const Vec3& p) const {
  const Vec3 edge = voxel_edge();
  std::array<std::size_t, 3> v{};
  for (int k = 0; k < 3; ++k) {
    const double cell = std::floor((p[k] - lower[k]) / edge[k]);
    const double hi = static_cast<double>(dims[static_cast<std::size_t>(k)] - 1);
    v[static_cast<std::size_t>(k)] = static_cast<std::size_t>(std::clamp(cell, 0.0, hi));
  }
  return v;
}

namespace {

std::pair<Vec3, Vec3> bounding_box(std::span<const PoseFrame> frames) {
  if (frames.empty()) throw Error(ErrorKind::kEmptyInput, "no frames to size a volume from");
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& f : frames)
    for (const auto& p : f.coords) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  if (!lo.allFinite() || !hi.allFinite())
    throw Error(ErrorKind::kNonFinite, "cannot size a volume around non-finite coordinates");
  return {lo, hi};
}

VolumeSpec centred_cubic(const Vec3& lo, const Vec3& hi, std::array<std::size_t, 3> dims,
                         double edge) {
  VolumeSpec spec;
  spec.dims = dims;
  const Vec3 center = 0.5 * (lo + hi);
  for (int k = 0; k < 3; ++k) {
    const double half = 0.5 * edge * static_cast<double>(dims[static_cast<std::size_t>(k)]);
    spec.lower[k] = center[k] - half;
    spec.upper[k] = center[k] + half;
  }
  spec.validate();
  return spec;
}

}  // namespace

VolumeSpec default_volume_spec(std::span<const PoseFrame> frames, std::array<std::size_t, 3> dims,
                               double sigma_voxels, double pad_sigmas) {
  const auto [lo, hi] = bounding_box(frames);
  const double pad_voxels = 2.0 * pad_sigmas * sigma_voxels;
  double edge = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double usable = static_cast<double>(dims[k]) - pad_voxels;
    if (!(usable > 0.0))
      throw Error(ErrorKind::kInvalidArgument, "volume too small for the requested padding");
    edge = std::max(edge, (hi[static_cast<int>(k)] - lo[static_cast<int>(k)]) / usable);
  }
  if (!(edge > 0.0)) edge = 1.0;  // single point: any positive edge works
  return centred_cubic(lo, hi, dims, edge);
}

VolumeSpec padded_volume_spec(std::span<const PoseFrame> frames, std::array<std::size_t, 3> dims,
                              double pad) {
  if (!(pad >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "padding must be non-negative");
  const auto [lo, hi] = bounding_box(frames);
  double edge = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    if (dims[k] == 0) throw Error(ErrorKind::kInvalidArgument, "volume dims must be positive");
    edge = std::max(edge, (hi[static_cast<int>(k)] - lo[static_cast<int>(k)] + 2.0 * pad) /
                              static_cast<double>(dims[k]));
  }
  if (!(edge > 0.0)) edge = 1.0;
  return centred_cubic(lo, hi, dims, edge);
}

double GaussianComponent::density(const Vec3& x) const {
  const double var = sigma * sigma;
  return std::exp(-(x - mu).squaredNorm() / (2.0 * var)) /
         std::pow(2.0 * std::numbers::pi * var, 1.5);
}

void HeatParams::validate() const {
  if (!(sigma_main > 0.0) || !std::isfinite(sigma_main))
    throw Error(ErrorKind::kInvalidArgument, "sigma_main must be positive");
  if (!(c > 0.0) || !std::isfinite(c))
    throw Error(ErrorKind::kInvalidArgument, "side spacing c must be positive");
}

std::size_t side_count(const Vec3& target, const Vec3& adjacent, double c) {
  if (!(c > 0.0)) throw Error(ErrorKind::kInvalidArgument, "side spacing c must be positive");
  return static_cast<std::size_t>(std::floor((adjacent - target).norm() / c));
}

std::vector<Vec3> transitional_points(const Vec3& target, const Vec3& adjacent, double c) {
  const std::size_t n = side_count(target, adjacent, c);
  std::vector<Vec3> points;
  points.reserve(n);
  const Vec3 bone = adjacent - target;
  const double length = bone.norm();
  for (std::size_t i = 1; i <= n; ++i)
    points.push_back(target + (static_cast<double>(i) * c / length) * bone);
  return points;
}

double side_sigma(std::size_t i, double sigma_main) {
  if (i == 0) throw Error(ErrorKind::kInvalidArgument, "side index starts at 1");
  const auto fi = static_cast<double>(i);
  return fi * fi * sigma_main;
}

double KeypointMixture::density(const Vec3& x) const {
  double sum = main.density(x);
  for (const auto& s : sides) sum += s.density(x);
  return sum;
}

KeypointMixture build_mixture(const PoseFrame& frame, const SkeletonTopology& topology,
                              const JointId& joint, const HeatParams& params) {
  params.validate();
  if (frame.coords.size() != topology.joint_count())
    throw Error(ErrorKind::kShapeMismatch, "frame joint count does not match topology");
  const auto neighbours = adjacent_joints(topology, joint);

  KeypointMixture mix;
  mix.target_joint = topology.joint(joint.index);
  const Vec3& target = frame.coords[joint.index];
  mix.main = {target, params.sigma_main};
  const std::size_t offset = params.schedule == SideSchedule::kAfterMain ? 1 : 0;
  for (const auto& adj : neighbours) {
    const auto points = transitional_points(target, frame.coords[adj.index], params.c);
    for (std::size_t i = 1; i <= points.size(); ++i) {
      mix.sides.push_back({points[i - 1], side_sigma(i + offset, params.sigma_main)});
      mix.side_adjacent.push_back(adj.index);
      mix.side_rank.push_back(i);
    }
  }
  return mix;
}

std::string_view to_string(VolumeMode mode) noexcept {
  return mode == VolumeMode::kFused ? "fused" : "channel";
}

VolumeMode volume_mode_from_string(std::string_view text) {
  if (text == "channel") return VolumeMode::kChannel;
  if (text == "fused") return VolumeMode::kFused;
  throw Error(ErrorKind::kInvalidArgument,
              "unknown volume mode '" + std::string(text) + "' (expected channel|fused)");
}

HeatVolume::HeatVolume(VolumeSpec spec, VolumeMode mode, std::vector<std::string> joint_names,
                       std::vector<std::vector<double>> channels)
    : spec_(spec), mode_(mode), joint_names_(std::move(joint_names)), channels_(std::move(channels)) {
  spec_.validate();
  if (channels_.empty()) throw Error(ErrorKind::kShapeMismatch, "volume has no channels");
  if (mode_ == VolumeMode::kChannel && channels_.size() != joint_names_.size())
    throw Error(ErrorKind::kShapeMismatch, "channel mode needs one channel per joint");
  if (mode_ == VolumeMode::kFused && channels_.size() != 1)
    throw Error(ErrorKind::kShapeMismatch, "fused mode holds exactly one channel");
  for (const auto& ch : channels_)
    if (ch.size() != spec_.voxel_count())
      throw Error(ErrorKind::kShapeMismatch, "channel size does not match volume dims");
}

namespace {

/// Adds one isotropic Gaussian to `grid`, exploiting separability:
/// exp(-|x-mu|^2 / 2s^2) = ex(x) * ey(y) * ez(z).
void splat(const GaussianComponent& g, const VolumeSpec& spec, std::vector<double>& grid,
           std::array<std::vector<double>, 3>& axis) {
  const Vec3 edge = spec.voxel_edge();
  const double inv_two_var = 1.0 / (2.0 * g.sigma * g.sigma);
  for (std::size_t k = 0; k < 3; ++k) {
    const int ki = static_cast<int>(k);
    axis[k].resize(spec.dims[k]);
    for (std::size_t i = 0; i < spec.dims[k]; ++i) {
      const double x = spec.lower[ki] + (static_cast<double>(i) + 0.5) * edge[ki] - g.mu[ki];
      axis[k][i] = std::exp(-x * x * inv_two_var);
    }
  }
  const double norm = 1.0 / std::pow(2.0 * std::numbers::pi * g.sigma * g.sigma, 1.5);
  const std::size_t w = spec.dims[0], h = spec.dims[1], d = spec.dims[2];
  const double* ex = axis[0].data();
  for (std::size_t z = 0; z < d; ++z) {
    const double wz = norm * axis[2][z];
    for (std::size_t y = 0; y < h; ++y) {
      const double wzy = wz * axis[1][y];
      double* row = grid.data() + w * (y + h * z);
      for (std::size_t x = 0; x < w; ++x) row[x] += wzy * ex[x];
    }
  }
}

void normalise_by_max(std::vector<double>& grid) {
  const double peak = *std::max_element(grid.begin(), grid.end());
  if (!(peak > 0.0) || !std::isfinite(peak))
    throw Error(ErrorKind::kDegenerate, "mixture vanished on the grid (sigma too small?)");
  for (double& v : grid) v /= peak;
}

void check_same_layout(const HeatVolume& a, const HeatVolume& b) {
  if (!(a.spec() == b.spec())) throw Error(ErrorKind::kSpecMismatch, "volume specs differ");
  if (a.mode() != b.mode()) throw Error(ErrorKind::kSpecMismatch, "volume modes differ");
  if (a.channel_count() != b.channel_count())
    throw Error(ErrorKind::kSpecMismatch, "channel counts differ");
}

/// Channel divided by its sum; rejects negative or all-zero channels.
std::vector<double> as_distribution(std::span<const double> ch) {
  double sum = 0.0;
  for (double v : ch) {
    if (!(v >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "volume has negative or NaN voxels");
    sum += v;
  }
  if (!(sum > 0.0)) throw Error(ErrorKind::kInvalidArgument, "volume channel sums to zero");
  std::vector<double> out(ch.begin(), ch.end());
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace

HeatVolume encode(const PoseFrame& frame, const SkeletonTopology& topology, const VolumeSpec& spec,
                  const HeatParams& params, VolumeMode mode) {
  spec.validate();
  params.validate();
  if (frame.coords.size() != topology.joint_count())
    throw Error(ErrorKind::kShapeMismatch, "frame joint count does not match topology");
  const double max_edge = spec.voxel_edge().maxCoeff();
  if (params.sigma_main < 0.5 * max_edge)
    throw Error(ErrorKind::kInvalidArgument,
                "sigma_main " + std::to_string(params.sigma_main) +
                    " is below half a voxel edge (" + std::to_string(0.5 * max_edge) + ")");
  for (std::size_t j = 0; j < frame.coords.size(); ++j) {
    if (!spec.contains(frame.coords[j]))
      throw Error(ErrorKind::kOutOfBounds,
                  "joint '" + topology.joint_names()[j] + "' lies outside the volume");
  }

  const std::size_t channels = mode == VolumeMode::kChannel ? topology.joint_count() : 1;
  std::vector<std::vector<double>> grids(channels, std::vector<double>(spec.voxel_count(), 0.0));
  std::array<std::vector<double>, 3> axis;
  for (std::size_t j = 0; j < topology.joint_count(); ++j) {
    const auto mix = build_mixture(frame, topology, topology.joint(j), params);
    auto& grid = grids[mode == VolumeMode::kChannel ? j : 0];
    splat(mix.main, spec, grid, axis);
    for (const auto& side : mix.sides) splat(side, spec, grid, axis);
  }
  for (auto& grid : grids) normalise_by_max(grid);
  return HeatVolume(spec, mode, topology.joint_names(), std::move(grids));
}

std::vector<Vec3> decode(const HeatVolume& volume) {
  if (volume.mode() != VolumeMode::kChannel)
    throw Error(ErrorKind::kInvalidArgument, "only channel-mode volumes can be decoded");
  const auto& spec = volume.spec();
  const auto [w, h, d] = spec.dims;
  std::vector<Vec3> out;
  out.reserve(volume.channel_count());
  for (std::size_t c = 0; c < volume.channel_count(); ++c) {
    const auto ch = volume.channel(c);
    const auto [lo_it, hi_it] = std::minmax_element(ch.begin(), ch.end());
    if (*lo_it == *hi_it)
      throw Error(ErrorKind::kFlatChannel, "channel '" + volume.joint_names()[c] + "' is flat");
    const auto peak = static_cast<std::size_t>(hi_it - ch.begin());
    const std::size_t px = peak % w, py = (peak / w) % h, pz = peak / (w * h);

    Vec3 acc = Vec3::Zero();
    double mass = 0.0;
    for (std::size_t z = pz > 0 ? pz - 1 : 0; z <= std::min(pz + 1, d - 1); ++z)
      for (std::size_t y = py > 0 ? py - 1 : 0; y <= std::min(py + 1, h - 1); ++y)
        for (std::size_t x = px > 0 ? px - 1 : 0; x <= std::min(px + 1, w - 1); ++x) {
          const double v = ch[spec.flat_index(x, y, z)];
          if (v <= 0.0) continue;
          acc += v * spec.voxel_center(x, y, z);
          mass += v;
        }
    out.push_back(acc / mass);
  }
  return out;
}

double cross_entropy_loss(const HeatVolume& pred, const HeatVolume& target) {
  check_same_layout(pred, target);
  double total = 0.0;
  for (std::size_t c = 0; c < target.channel_count(); ++c) {
    const auto p = as_distribution(pred.channel(c));
    const auto t = as_distribution(target.channel(c));
    double h = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] > 0.0) h -= t[i] * std::log(p[i] + kCrossEntropyEpsilon);
    total += h;
  }
  return total / static_cast<double>(target.channel_count());
}

double heat_entropy(const HeatVolume& target) { return cross_entropy_loss(target, target); }

double mse_loss(const HeatVolume& pred, const HeatVolume& target) {
  check_same_layout(pred, target);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < target.channel_count(); ++c) {
    const auto p = pred.channel(c);
    const auto t = target.channel(c);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double diff = p[i] - t[i];
      sum += diff * diff;
    }
    count += t.size();
  }
  return sum / static_cast<double>(count);
}

}  // namespace augmotion
