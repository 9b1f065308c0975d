#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace augmotion {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct JointId {
  std::size_t index = 0;
  std::string name;

  friend bool operator==(const JointId&, const JointId&) = default;
};

/// Anchor joints used to define the universal coordinate system. The pubis is
/// the pelvis root in the default topology.
struct ReferenceTriple {
  std::size_t left_shoulder = 0;
  std::size_t right_shoulder = 0;
  std::size_t pubis = 0;

  friend bool operator==(const ReferenceTriple&, const ReferenceTriple&) = default;
};

using Edge = std::pair<std::size_t, std::size_t>;

/// Joint names plus undirected kinematic edges. Immutable after construction;
/// the constructor rejects duplicate names, out-of-range or self edges and
/// disconnected graphs.
class SkeletonTopology {
 public:
  SkeletonTopology(std::vector<std::string> joint_names, std::vector<Edge> edges,
                   std::optional<ReferenceTriple> reference = std::nullopt);

  /// 17-joint Human3.6M ordering.
  static SkeletonTopology h36m17();

  std::size_t joint_count() const noexcept { return names_.size(); }
  const std::vector<std::string>& joint_names() const noexcept { return names_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  JointId joint(std::size_t index) const;
  JointId joint(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
  bool has_joint(std::string_view name) const noexcept;

  bool has_reference() const noexcept { return reference_.has_value(); }
  /// Throws kSchema when the topology carries no reference triple.
  const ReferenceTriple& reference() const;
  const std::optional<ReferenceTriple>& reference_if_any() const noexcept {
    return reference_;
  }

  /// Sorted neighbour indices of `index`.
  const std::vector<std::size_t>& neighbours(std::size_t index) const;

  friend bool operator==(const SkeletonTopology& a, const SkeletonTopology& b) {
    return a.names_ == b.names_ && a.edges_ == b.edges_ && a.reference_ == b.reference_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Edge> edges_;  // normalised: first < second, sorted, unique
  std::optional<ReferenceTriple> reference_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

struct PoseFrame {
  std::vector<Vec3> coords;
  std::size_t frame_index = 0;
};

inline constexpr std::string_view kUnitsMillimetres = "mm";
inline constexpr std::string_view kUnitsUniversal = "universal";

struct PoseSequence {
  SkeletonTopology topology = SkeletonTopology::h36m17();
  std::vector<PoseFrame> frames;
  double fps = 50.0;
  std::string source_label;
  std::string units = std::string(kUnitsMillimetres);
  /// Vertical direction of the dataset's native frame.
  Vec3 up_axis = Vec3::UnitZ();
};

/// All joints sharing an edge with `joint`, sorted by index.
std::vector<JointId> adjacent_joints(const SkeletonTopology& topology, const JointId& joint);

Vec3 shoulder_midpoint(const PoseFrame& frame, const SkeletonTopology& topology);

enum class IssueKind { kNoFrames, kNonFinite, kJointCountMismatch, kNonMonotoneIndex, kBadFps, kBadUnits };

struct ValidationIssue {
  IssueKind kind;
  std::optional<std::size_t> frame;  // position in `frames`
  std::optional<std::size_t> joint;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const noexcept { return issues.empty(); }
  std::string summary() const;
};

ValidationReport validate_sequence(const PoseSequence& seq);

}  // namespace augmotion
