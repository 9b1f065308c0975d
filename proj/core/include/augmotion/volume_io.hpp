#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "augmotion/heatpose.hpp"

namespace augmotion {

inline constexpr int kVolumeSchemaVersion = 1;
inline constexpr std::string_view kVolumeMagic = "AMHVOL01";

/// One or more encoded frames sharing a VolumeSpec.
///
/// On disk:
///   bytes 0..7    ASCII "AMHVOL01"
///   bytes 8..15   header length L, uint64 little-endian
///   next L bytes  UTF-8 JSON header (spec, mode, joint names, frame indices,
///                 encoding parameters, source pose metadata)
///   payload       float32 little-endian voxels, frame-major, then channel,
///                 then z, y, x with x fastest
/// Values are narrowed to float32 on write, so a peak of exactly 1 survives.
struct VolumeFile {
  std::vector<HeatVolume> volumes;
  std::vector<std::size_t> frame_indices;
  HeatParams params;
  /// Canonical "metadata" object of the source sequence; lets decode restore
  /// topology, fps and units.
  nlohmann::json pose_metadata = nlohmann::json::object();
};

std::string to_volume_bytes(const VolumeFile& file);
VolumeFile parse_volume_bytes(std::string_view bytes);

void write_volume_file(const VolumeFile& file, const std::filesystem::path& path);
VolumeFile read_volume_file(const std::filesystem::path& path);

std::string_view to_string(SideSchedule schedule) noexcept;
SideSchedule side_schedule_from_string(std::string_view text);

}  // namespace augmotion
