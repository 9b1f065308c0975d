#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "augmotion/skeleton.hpp"

namespace augmotion {

inline constexpr int kPoseSchemaVersion = 1;
/// First eight bytes of the binary pose variant.
inline constexpr std::string_view kPoseBinaryMagic = "AMPOSE01";

enum class PoseFileFormat { kJson, kBinary };

/// foreign joint name -> canonical joint name
using JointMap = std::map<std::string, std::string>;

/// A parsed canonical file: the sequence plus the full metadata object, so
/// callers can read keys the sequence itself does not model (provenance,
/// harmonization records, joint maps).
struct CanonicalDocument {
  PoseSequence sequence;
  nlohmann::json metadata;
};

/// The "metadata" object of a canonical document (topology, fps, units, ...).
nlohmann::json pose_metadata_json(const PoseSequence& seq,
                                  const nlohmann::json& extra_metadata = nlohmann::json::object());
/// Inverse of pose_metadata_json; the returned sequence has no frames.
PoseSequence sequence_from_pose_metadata(const nlohmann::json& metadata);

/// Serialises `seq` as the canonical JSON document. Keys of `extra_metadata`
/// are merged into "metadata" unless they collide with a reserved key.
std::string to_canonical_json(const PoseSequence& seq,
                              const nlohmann::json& extra_metadata = nlohmann::json::object());
CanonicalDocument parse_canonical_json(std::string_view text);

std::string to_canonical_binary(const PoseSequence& seq,
                                const nlohmann::json& extra_metadata = nlohmann::json::object());
CanonicalDocument parse_canonical_binary(std::string_view bytes);

void write_canonical(const PoseSequence& seq, const std::filesystem::path& path,
                     const nlohmann::json& extra_metadata = nlohmann::json::object(),
                     PoseFileFormat format = PoseFileFormat::kJson);

/// Format is detected from the leading magic bytes.
CanonicalDocument read_canonical_document(const std::filesystem::path& path);
PoseSequence read_canonical(const std::filesystem::path& path);

/// Reorders a foreign-layout sequence onto `target`. Each source joint is
/// renamed through `map` (unmapped names pass through unchanged); every target
/// joint must then be present exactly once.
PoseSequence remap_joints(const PoseSequence& seq, const JointMap& map,
                          const SkeletonTopology& target);

}  // namespace augmotion
