#include "augmotion/volume_io.hpp"

#include "augmotion/error.hpp"
#include "augmotion/file_util.hpp"
#include "byte_order.hpp"

namespace augmotion {

using nlohmann::json;

std::string_view to_string(SideSchedule schedule) noexcept {
  return schedule == SideSchedule::kSquaredIndex ? "squared_index" : "after_main";
}

SideSchedule side_schedule_from_string(std::string_view text) {
  if (text == "squared_index") return SideSchedule::kSquaredIndex;
  if (text == "after_main") return SideSchedule::kAfterMain;
  throw Error(ErrorKind::kInvalidArgument, "unknown side schedule '" + std::string(text) +
                                               "' (expected squared_index|after_main)");
}

std::string to_volume_bytes(const VolumeFile& file) {
  if (file.volumes.empty()) throw Error(ErrorKind::kInvalidArgument, "no volumes to write");
  if (file.frame_indices.size() != file.volumes.size())
    throw Error(ErrorKind::kShapeMismatch, "one frame index per volume required");
  const HeatVolume& first = file.volumes.front();
  for (const auto& v : file.volumes) {
    if (!(v.spec() == first.spec()) || v.mode() != first.mode() ||
        v.joint_names() != first.joint_names())
      throw Error(ErrorKind::kSpecMismatch, "all volumes in a file must share spec, mode, joints");
  }
  const auto& spec = first.spec();
  json header = {
      {"schema_version", kVolumeSchemaVersion},
      {"kind", "heatpose_volume"},
      {"dims", spec.dims},
      {"lower", {spec.lower.x(), spec.lower.y(), spec.lower.z()}},
      {"upper", {spec.upper.x(), spec.upper.y(), spec.upper.z()}},
      {"mode", to_string(first.mode())},
      {"joint_names", first.joint_names()},
      {"channel_count", first.channel_count()},
      {"frame_count", file.volumes.size()},
      {"frame_indices", file.frame_indices},
      {"sigma_main", file.params.sigma_main},
      {"c", file.params.c},
      {"side_schedule", to_string(file.params.schedule)},
      {"value_type", "float32_le"},
      {"layout", "frame, channel, z, y, x (x fastest)"},
      {"pose_metadata", file.pose_metadata},
  };
  std::string out = detail::frame_file(kVolumeMagic, header.dump());
  out.reserve(out.size() + file.volumes.size() * first.channel_count() * spec.voxel_count() * 4);
  for (const auto& v : file.volumes)
    for (std::size_t c = 0; c < v.channel_count(); ++c)
      for (double value : v.channel(c)) detail::append_f32(out, static_cast<float>(value));
  return out;
}

VolumeFile parse_volume_bytes(std::string_view bytes) {
  const auto framed = detail::split_framed(bytes, kVolumeMagic);
  json header;
  try {
    header = json::parse(framed.header.begin(), framed.header.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("volume header: ") + e.what());
  }
  try {
    if (header.at("schema_version").get<int>() != kVolumeSchemaVersion)
      throw Error(ErrorKind::kSchema, "volume schema version mismatch: file has " +
                                          header.at("schema_version").dump());
    VolumeSpec spec;
    spec.dims = header.at("dims").get<std::array<std::size_t, 3>>();
    const auto lower = header.at("lower").get<std::array<double, 3>>();
    const auto upper = header.at("upper").get<std::array<double, 3>>();
    spec.lower = Vec3(lower[0], lower[1], lower[2]);
    spec.upper = Vec3(upper[0], upper[1], upper[2]);
    spec.validate();

    VolumeFile file;
    const VolumeMode mode = volume_mode_from_string(header.at("mode").get<std::string>());
    const auto names = header.at("joint_names").get<std::vector<std::string>>();
    const auto channels = header.at("channel_count").get<std::size_t>();
    const auto frames = header.at("frame_count").get<std::size_t>();
    file.frame_indices = header.at("frame_indices").get<std::vector<std::size_t>>();
    file.params.sigma_main = header.at("sigma_main").get<double>();
    file.params.c = header.at("c").get<double>();
    file.params.schedule = side_schedule_from_string(header.at("side_schedule").get<std::string>());
    if (header.at("value_type").get<std::string>() != "float32_le")
      throw Error(ErrorKind::kSchema, "unsupported volume value type");
    if (const auto it = header.find("pose_metadata"); it != header.end()) file.pose_metadata = *it;
    if (file.frame_indices.size() != frames)
      throw Error(ErrorKind::kSchema, "frame_indices length does not match frame_count");

    const std::size_t per_channel = spec.voxel_count();
    const std::size_t expected = frames * channels * per_channel * 4;
    if (framed.payload.size() != expected)
      throw Error(ErrorKind::kParse, "volume payload holds " +
                                         std::to_string(framed.payload.size()) +
                                         " bytes, header implies " + std::to_string(expected));
    const char* p = framed.payload.data();
    file.volumes.reserve(frames);
    for (std::size_t f = 0; f < frames; ++f) {
      std::vector<std::vector<double>> grids(channels, std::vector<double>(per_channel));
      for (auto& grid : grids)
        for (double& v : grid) {
          v = detail::load_f32(p);
          p += 4;
        }
      file.volumes.emplace_back(spec, mode, names, std::move(grids));
    }
    return file;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("volume header: ") + e.what());
  }
}

void write_volume_file(const VolumeFile& file, const std::filesystem::path& path) {
  write_file_atomic(path, to_volume_bytes(file));
}

VolumeFile read_volume_file(const std::filesystem::path& path) {
  try {
    return parse_volume_bytes(read_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace augmotion
