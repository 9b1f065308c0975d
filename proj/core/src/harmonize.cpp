#include "augmotion/harmonize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "augmotion/error.hpp"
#include "augmotion/kmeans.hpp"

namespace augmotion {

ScaleRatios compute_scale_ratios(std::span<const PoseSequence> sequences) {
  ScaleRatios out;
  double sum_s = 0.0, sum_sp = 0.0;
  for (const auto& seq : sequences) {
    for (const auto& frame : seq.frames) {
      const auto [ls, rs, pubis] = reference_points(frame, seq.topology);
      sum_s += (ls - rs).norm();
      sum_sp += (0.5 * (ls + rs) - pubis).norm();
      ++out.n_frames_used;
    }
  }
  if (out.n_frames_used == 0)
    throw Error(ErrorKind::kEmptyInput, "no frames to compute scale ratios from");
  out.m_s = sum_s / static_cast<double>(out.n_frames_used);
  out.m_sp = sum_sp / static_cast<double>(out.n_frames_used);
  return out;
}

std::array<Vec3, 3> canonical_reference_targets() {
  return {Vec3(-1.0, 0.0, 3.0), Vec3(1.0, 0.0, 3.0), Vec3(0.0, 0.0, 0.5)};
}

std::array<Vec3, 3> reference_points(const PoseFrame& frame, const SkeletonTopology& topology) {
  const auto& ref = topology.reference();
  if (frame.coords.size() != topology.joint_count())
    throw Error(ErrorKind::kShapeMismatch, "frame joint count does not match topology");
  return {frame.coords[ref.left_shoulder], frame.coords[ref.right_shoulder],
          frame.coords[ref.pubis]};
}

double uprightness_feature(const PoseFrame& frame, const SkeletonTopology& topology,
                           const Vec3& up_axis) {
  const Vec3 torso = shoulder_midpoint(frame, topology) - frame.coords[topology.reference().pubis];
  const double len = torso.norm();
  const double up_len = up_axis.norm();
  if (!(up_len > 0.0)) throw Error(ErrorKind::kInvalidArgument, "up axis has zero length");
  if (!(len > 0.0))
    throw Error(ErrorKind::kDegenerate, "pubis and shoulder midpoint coincide at frame " +
                                            std::to_string(frame.frame_index));
  return std::clamp(torso.dot(up_axis) / (len * up_len), -1.0, 1.0);
}

KeyFrameResult pick_key_frame(std::span<const double> features,
                              std::span<const std::size_t> assignments) {
  if (features.empty()) throw Error(ErrorKind::kEmptyInput, "no frames to pick a key frame from");
  if (features.size() != assignments.size())
    throw Error(ErrorKind::kShapeMismatch, "one assignment per feature required");

  struct Cluster {
    std::size_t size = 0;
    double sum = 0.0;
    std::size_t first = std::numeric_limits<std::size_t>::max();
    double mean() const { return sum / static_cast<double>(size); }
  };
  const std::size_t labels = *std::max_element(assignments.begin(), assignments.end()) + 1;
  std::vector<Cluster> clusters(labels);
  for (std::size_t i = 0; i < features.size(); ++i) {
    auto& c = clusters[assignments[i]];
    ++c.size;
    c.sum += features[i];
    c.first = std::min(c.first, i);
  }

  std::vector<const Cluster*> present;
  for (const auto& c : clusters)
    if (c.size > 0) present.push_back(&c);
  std::sort(present.begin(), present.end(), [](const Cluster* a, const Cluster* b) {
    if (a->mean() != b->mean()) return a->mean() < b->mean();
    return a->first < b->first;
  });

  const Cluster* best = nullptr;
  for (const Cluster* c : present) {
    if (!best || c->size > best->size ||
        (c->size == best->size &&
         (c->mean() > best->mean() || (c->mean() == best->mean() && c->first < best->first))))
      best = c;
  }
  const std::size_t best_label = static_cast<std::size_t>(best - clusters.data());

  KeyFrameResult out;
  out.centroid = best->mean();
  for (std::size_t i = 0; i < present.size() && i < kKeyFrameClusters; ++i)
    out.cluster_sizes[i] = present[i]->size;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (assignments[i] != best_label) continue;
    const double gap = std::abs(features[i] - out.centroid);
    if (gap < best_gap) {
      best_gap = gap;
      out.frame_index = i;
    }
  }
  out.feature_values.assign(features.begin(), features.end());
  return out;
}

KeyFrameResult select_key_frame(const PoseSequence& seq, std::uint64_t seed) {
  if (seq.frames.empty()) throw Error(ErrorKind::kEmptyInput, "sequence has no frames");
  std::vector<double> features;
  features.reserve(seq.frames.size());
  for (const auto& frame : seq.frames)
    features.push_back(uprightness_feature(frame, seq.topology, seq.up_axis));
  const std::size_t k = std::min(kKeyFrameClusters, features.size());
  const auto clusters = kmeans(std::span<const double>(features), k, seed);
  return pick_key_frame(features, clusters.assignments);
}

HarmonizeResult harmonize_sequence(const PoseSequence& seq, std::size_t key_frame,
                                   const std::array<Vec3, 3>& targets) {
  if (key_frame >= seq.frames.size())
    throw Error(ErrorKind::kOutOfBounds, "key frame " + std::to_string(key_frame) +
                                             " outside a sequence of " +
                                             std::to_string(seq.frames.size()) + " frames");
  const auto triple = reference_points(seq.frames[key_frame], seq.topology);
  const double span = (triple[0] - triple[1]).norm();
  if (!(span > 0.0) || !std::isfinite(span))
    throw Error(ErrorKind::kDegenerate, "key frame has zero shoulder distance");

  HarmonizeResult out;
  out.key_frame = key_frame;
  out.scale = (targets[0] - targets[1]).norm() / span;
  const std::array<Vec3, 3> scaled = {out.scale * triple[0], out.scale * triple[1],
                                      out.scale * triple[2]};
  out.transform = kabsch(scaled, targets);

  std::array<Vec3, 3> landed;
  for (int i = 0; i < 3; ++i) landed[i] = out.transform.apply(scaled[i]);
  out.key_frame_rmsd = rmsd(landed, targets);

  out.sequence = seq;
  out.sequence.units = std::string(kUnitsUniversal);
  out.sequence.up_axis = Vec3::UnitZ();
  for (auto& frame : out.sequence.frames)
    for (auto& p : frame.coords) p = out.transform.apply(out.scale * p);
  return out;
}

}  // namespace augmotion
