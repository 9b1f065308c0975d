#include "augmotion/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "augmotion/error.hpp"

namespace augmotion {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kUnknownJoint: return "unknown_joint";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kEmptyInput: return "empty_input";
    case ErrorKind::kDegenerate: return "degenerate";
    case ErrorKind::kOutOfBounds: return "out_of_bounds";
    case ErrorKind::kShapeMismatch: return "shape_mismatch";
    case ErrorKind::kSpecMismatch: return "spec_mismatch";
    case ErrorKind::kFlatChannel: return "flat_channel";
    case ErrorKind::kNonFinite: return "non_finite";
  }
  return "unknown";
}

SkeletonTopology::SkeletonTopology(std::vector<std::string> joint_names, std::vector<Edge> edges,
                                   std::optional<ReferenceTriple> reference)
    : names_(std::move(joint_names)), reference_(reference) {
  const std::size_t n = names_.size();
  if (n == 0) throw Error(ErrorKind::kSchema, "topology has no joints");

  std::set<std::string_view> seen;
  for (const auto& name : names_) {
    if (name.empty()) throw Error(ErrorKind::kSchema, "empty joint name");
    if (!seen.insert(name).second)
      throw Error(ErrorKind::kSchema, "duplicate joint name '" + name + "'");
  }

  for (auto& [a, b] : edges) {
    if (a >= n || b >= n)
      throw Error(ErrorKind::kSchema, "edge endpoint out of range (" + std::to_string(a) + ", " +
                                          std::to_string(b) + ")");
    if (a == b) throw Error(ErrorKind::kSchema, "self edge on joint '" + names_[a] + "'");
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  adjacency_.resize(n);
  for (const auto& [a, b] : edges_) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());

  // connectivity by flood fill from joint 0
  std::vector<bool> reached(n, false);
  std::vector<std::size_t> stack{0};
  reached[0] = true;
  while (!stack.empty()) {
    const std::size_t j = stack.back();
    stack.pop_back();
    for (std::size_t k : adjacency_[j]) {
      if (!reached[k]) {
        reached[k] = true;
        stack.push_back(k);
      }
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!reached[j])
      throw Error(ErrorKind::kSchema, "topology is not connected: '" + names_[j] +
                                          "' unreachable from '" + names_[0] + "'");
  }

  if (reference_) {
    const auto& r = *reference_;
    if (r.left_shoulder >= n || r.right_shoulder >= n || r.pubis >= n)
      throw Error(ErrorKind::kSchema, "reference triple joint out of range");
    if (r.left_shoulder == r.right_shoulder || r.left_shoulder == r.pubis ||
        r.right_shoulder == r.pubis)
      throw Error(ErrorKind::kSchema, "reference triple joints must be distinct");
  }
}

SkeletonTopology SkeletonTopology::h36m17() {
  std::vector<std::string> names = {
      "pelvis",     "right_hip",     "right_knee",  "right_ankle", "left_hip",      "left_knee",
      "left_ankle", "spine",         "neck",        "head",        "head_top",      "left_shoulder",
      "left_elbow", "left_wrist",    "right_shoulder", "right_elbow", "right_wrist"};
  std::vector<Edge> edges = {{0, 1},  {1, 2},  {2, 3},  {0, 4},   {4, 5},   {5, 6},
                             {0, 7},  {7, 8},  {8, 9},  {9, 10},  {8, 11},  {11, 12},
                             {12, 13}, {8, 14}, {14, 15}, {15, 16}};
  return SkeletonTopology(std::move(names), std::move(edges), ReferenceTriple{11, 14, 0});
}

JointId SkeletonTopology::joint(std::size_t index) const {
  if (index >= names_.size())
    throw Error(ErrorKind::kUnknownJoint, "joint index " + std::to_string(index) +
                                              " out of range for " +
                                              std::to_string(names_.size()) + " joints");
  return JointId{index, names_[index]};
}

JointId SkeletonTopology::joint(std::string_view name) const { return joint(index_of(name)); }

std::size_t SkeletonTopology::index_of(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end())
    throw Error(ErrorKind::kUnknownJoint, "unknown joint '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

bool SkeletonTopology::has_joint(std::string_view name) const noexcept {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const ReferenceTriple& SkeletonTopology::reference() const {
  if (!reference_) throw Error(ErrorKind::kSchema, "topology has no reference triple");
  return *reference_;
}

const std::vector<std::size_t>& SkeletonTopology::neighbours(std::size_t index) const {
  if (index >= adjacency_.size())
    throw Error(ErrorKind::kUnknownJoint, "joint index " + std::to_string(index) + " out of range");
  return adjacency_[index];
}

std::vector<JointId> adjacent_joints(const SkeletonTopology& topology, const JointId& joint) {
  if (joint.index >= topology.joint_count() ||
      (!joint.name.empty() && topology.joint_names()[joint.index] != joint.name))
    throw Error(ErrorKind::kUnknownJoint,
                "joint '" + joint.name + "' (#" + std::to_string(joint.index) + ") not in topology");
  std::vector<JointId> out;
  for (std::size_t k : topology.neighbours(joint.index)) out.push_back(topology.joint(k));
  return out;
}

Vec3 shoulder_midpoint(const PoseFrame& frame, const SkeletonTopology& topology) {
  const auto& ref = topology.reference();
  if (frame.coords.size() != topology.joint_count())
    throw Error(ErrorKind::kShapeMismatch, "frame joint count does not match topology");
  return 0.5 * (frame.coords[ref.left_shoulder] + frame.coords[ref.right_shoulder]);
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "; ";
    os << issues[i].message;
  }
  return os.str();
}

ValidationReport validate_sequence(const PoseSequence& seq) {
  ValidationReport report;
  auto add = [&](IssueKind kind, std::optional<std::size_t> frame, std::optional<std::size_t> joint,
                 std::string message) {
    report.issues.push_back({kind, frame, joint, std::move(message)});
  };

  if (!(seq.fps > 0.0) || !std::isfinite(seq.fps))
    add(IssueKind::kBadFps, std::nullopt, std::nullopt, "fps must be positive and finite");
  if (seq.units != kUnitsMillimetres && seq.units != kUnitsUniversal)
    add(IssueKind::kBadUnits, std::nullopt, std::nullopt, "unknown units '" + seq.units + "'");
  if (seq.frames.empty()) {
    add(IssueKind::kNoFrames, std::nullopt, std::nullopt, "no frames");
    return report;
  }

  const std::size_t joints = seq.topology.joint_count();
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    const auto& frame = seq.frames[f];
    if (frame.coords.size() != joints) {
      add(IssueKind::kJointCountMismatch, f, std::nullopt,
          "frame " + std::to_string(frame.frame_index) + " has " +
              std::to_string(frame.coords.size()) + " joints, topology has " +
              std::to_string(joints));
    }
    for (std::size_t j = 0; j < frame.coords.size(); ++j) {
      if (!frame.coords[j].allFinite()) {
        const std::string name =
            j < joints ? seq.topology.joint_names()[j] : "#" + std::to_string(j);
        add(IssueKind::kNonFinite, f, j,
            "non-finite coordinate at frame " + std::to_string(frame.frame_index) + ", joint " +
                name);
      }
    }
    if (f > 0 && frame.frame_index <= seq.frames[f - 1].frame_index) {
      add(IssueKind::kNonMonotoneIndex, f, std::nullopt,
          "frame index " + std::to_string(frame.frame_index) + " does not increase after " +
              std::to_string(seq.frames[f - 1].frame_index));
    }
  }
  return report;
}

}  // namespace augmotion
