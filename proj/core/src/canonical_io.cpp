#include "augmotion/canonical_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "augmotion/error.hpp"
#include "augmotion/file_util.hpp"
#include "byte_order.hpp"

namespace augmotion {

using nlohmann::json;

namespace {

const std::set<std::string> kReservedKeys = {"dataset",  "fps",   "units",           "up_axis",
                                             "joint_names", "edges", "reference_triple"};

json metadata_json(const PoseSequence& seq, const json& extra) {
  json meta = json::object();
  if (!extra.is_null()) {
    if (!extra.is_object())
      throw Error(ErrorKind::kInvalidArgument, "extra metadata must be a JSON object");
    for (const auto& [key, value] : extra.items()) {
      if (kReservedKeys.count(key))
        throw Error(ErrorKind::kInvalidArgument, "extra metadata key '" + key + "' is reserved");
      meta[key] = value;
    }
  }
  const auto& topo = seq.topology;
  meta["dataset"] = seq.source_label;
  meta["fps"] = seq.fps;
  meta["units"] = seq.units;
  meta["up_axis"] = {seq.up_axis.x(), seq.up_axis.y(), seq.up_axis.z()};
  meta["joint_names"] = topo.joint_names();
  json edges = json::array();
  for (const auto& [a, b] : topo.edges())
    edges.push_back({topo.joint_names()[a], topo.joint_names()[b]});
  meta["edges"] = std::move(edges);
  if (const auto& ref = topo.reference_if_any()) {
    meta["reference_triple"] = {{"left_shoulder", topo.joint_names()[ref->left_shoulder]},
                                {"right_shoulder", topo.joint_names()[ref->right_shoulder]},
                                {"pubis", topo.joint_names()[ref->pubis]}};
  }
  return meta;
}

void require_writable(const PoseSequence& seq) {
  const auto report = validate_sequence(seq);
  if (!report.ok()) throw Error(ErrorKind::kValidation, report.summary());
}

json frame_indices_json(const PoseSequence& seq) {
  json out = json::array();
  for (const auto& f : seq.frames) out.push_back(f.frame_index);
  return out;
}

std::string indent_block(const std::string& text, const std::string& pad) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    out.push_back(ch);
    if (ch == '\n') out += pad;
  }
  return out;
}

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::kSchema, where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, std::string("missing field '") + key + "'");
  return *it;
}

double as_number(const json& value, const std::string& where) {
  if (!value.is_number()) schema_error(where, "expected a number");
  return value.get<double>();
}

std::string as_string(const json& value, const std::string& where) {
  if (!value.is_string()) schema_error(where, "expected a string");
  return value.get<std::string>();
}

Vec3 as_vec3(const json& value, const std::string& where) {
  if (!value.is_array() || value.size() != 3) schema_error(where, "expected [x, y, z]");
  return Vec3(as_number(value[0], where + "[0]"), as_number(value[1], where + "[1]"),
              as_number(value[2], where + "[2]"));
}

void check_schema_version(const json& root) {
  const auto& version = require(root, "schema_version", "document");
  if (!version.is_number_integer())
    schema_error("schema_version", "expected an integer");
  if (version.get<long long>() != kPoseSchemaVersion)
    throw Error(ErrorKind::kSchema, "schema version mismatch: file has " + version.dump() +
                                        ", reader supports " + std::to_string(kPoseSchemaVersion));
}

/// Topology and scalar metadata; frames are filled in by the caller.
PoseSequence sequence_from_metadata(const json& meta) {
  if (!meta.is_object()) schema_error("metadata", "expected an object");

  const auto& names_json = require(meta, "joint_names", "metadata");
  if (!names_json.is_array()) schema_error("metadata.joint_names", "expected an array");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < names_json.size(); ++i)
    names.push_back(as_string(names_json[i], "metadata.joint_names[" + std::to_string(i) + "]"));

  auto lookup = [&](const std::string& name, const std::string& where) -> std::size_t {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) schema_error(where, "unknown joint '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
  };

  std::vector<Edge> edges;
  const auto& edges_json = require(meta, "edges", "metadata");
  if (!edges_json.is_array()) schema_error("metadata.edges", "expected an array");
  for (std::size_t i = 0; i < edges_json.size(); ++i) {
    const std::string where = "metadata.edges[" + std::to_string(i) + "]";
    const auto& e = edges_json[i];
    if (!e.is_array() || e.size() != 2) schema_error(where, "expected [joint, joint]");
    edges.emplace_back(lookup(as_string(e[0], where), where), lookup(as_string(e[1], where), where));
  }

  std::optional<ReferenceTriple> reference;
  if (const auto it = meta.find("reference_triple"); it != meta.end() && !it->is_null()) {
    const std::string where = "metadata.reference_triple";
    if (!it->is_object()) schema_error(where, "expected an object");
    reference = ReferenceTriple{
        lookup(as_string(require(*it, "left_shoulder", where), where + ".left_shoulder"), where),
        lookup(as_string(require(*it, "right_shoulder", where), where + ".right_shoulder"), where),
        lookup(as_string(require(*it, "pubis", where), where + ".pubis"), where)};
  }

  PoseSequence seq{SkeletonTopology(std::move(names), std::move(edges), reference), {}, 0.0, "",
                   "", Vec3::UnitZ()};
  seq.fps = as_number(require(meta, "fps", "metadata"), "metadata.fps");
  seq.units = as_string(require(meta, "units", "metadata"), "metadata.units");
  if (seq.units != kUnitsMillimetres && seq.units != kUnitsUniversal)
    schema_error("metadata.units", "expected \"mm\" or \"universal\", got \"" + seq.units + "\"");
  if (const auto it = meta.find("dataset"); it != meta.end())
    seq.source_label = as_string(*it, "metadata.dataset");
  if (const auto it = meta.find("up_axis"); it != meta.end())
    seq.up_axis = as_vec3(*it, "metadata.up_axis");
  return seq;
}

std::vector<std::size_t> read_frame_indices(const json& root, std::size_t frame_count) {
  std::vector<std::size_t> indices(frame_count);
  const auto it = root.find("frame_indices");
  if (it == root.end()) {
    for (std::size_t i = 0; i < frame_count; ++i) indices[i] = i;
    return indices;
  }
  if (!it->is_array() || it->size() != frame_count)
    schema_error("frame_indices", "expected an array with one entry per frame");
  for (std::size_t i = 0; i < frame_count; ++i) {
    const auto& v = (*it)[i];
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      schema_error("frame_indices[" + std::to_string(i) + "]", "expected a non-negative integer");
    indices[i] = v.get<std::size_t>();
  }
  return indices;
}

void finish(PoseSequence& seq) {
  const auto report = validate_sequence(seq);
  if (!report.ok()) throw Error(ErrorKind::kValidation, report.summary());
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json parse_json_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_and_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw Error(ErrorKind::kParse, "JSON parse error at line " + std::to_string(line) +
                                       ", column " + std::to_string(col) + ": " + e.what());
  }
}

}  // namespace

json pose_metadata_json(const PoseSequence& seq, const json& extra_metadata) {
  return metadata_json(seq, extra_metadata);
}

PoseSequence sequence_from_pose_metadata(const json& metadata) {
  return sequence_from_metadata(metadata);
}

std::string to_canonical_json(const PoseSequence& seq, const json& extra_metadata) {
  require_writable(seq);
  const json meta = metadata_json(seq, extra_metadata);

  std::string out = "{\n  \"schema_version\": " + std::to_string(kPoseSchemaVersion) + ",\n";
  out += "  \"metadata\": " + indent_block(meta.dump(2), "  ") + ",\n";
  out += "  \"frame_indices\": " + frame_indices_json(seq).dump() + ",\n";
  out += "  \"frames\": [";
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    out += f ? ",\n    [" : "\n    [";
    const auto& coords = seq.frames[f].coords;
    for (std::size_t j = 0; j < coords.size(); ++j) {
      if (j) out += ',';
      out += '[' + json(coords[j].x()).dump() + ',' + json(coords[j].y()).dump() + ',' +
             json(coords[j].z()).dump() + ']';
    }
    out += ']';
  }
  out += "\n  ]\n}\n";
  return out;
}

CanonicalDocument parse_canonical_json(std::string_view text) {
  const json root = parse_json_text(text);
  if (!root.is_object()) schema_error("document", "expected a JSON object");
  check_schema_version(root);
  const json& meta = require(root, "metadata", "document");
  PoseSequence seq = sequence_from_metadata(meta);

  const auto& frames = require(root, "frames", "document");
  if (!frames.is_array()) schema_error("frames", "expected an array");
  const auto indices = read_frame_indices(root, frames.size());
  const auto& names = seq.topology.joint_names();
  seq.frames.reserve(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const std::string where = "frames[" + std::to_string(f) + "]";
    const auto& fj = frames[f];
    if (!fj.is_array()) schema_error(where, "expected an array of [x, y, z]");
    if (fj.size() < names.size())
      schema_error(where, "missing joint '" + names[fj.size()] + "' (" + std::to_string(fj.size()) +
                              " of " + std::to_string(names.size()) + " joints present)");
    if (fj.size() > names.size())
      schema_error(where, "has " + std::to_string(fj.size()) + " coordinates for " +
                              std::to_string(names.size()) + " joints");
    PoseFrame frame;
    frame.frame_index = indices[f];
    frame.coords.reserve(names.size());
    for (std::size_t j = 0; j < fj.size(); ++j)
      frame.coords.push_back(as_vec3(fj[j], where + "[" + names[j] + "]"));
    seq.frames.push_back(std::move(frame));
  }
  finish(seq);
  return {std::move(seq), meta};
}

std::string to_canonical_binary(const PoseSequence& seq, const json& extra_metadata) {
  require_writable(seq);
  json header = {{"schema_version", kPoseSchemaVersion},
                 {"metadata", metadata_json(seq, extra_metadata)},
                 {"frame_indices", frame_indices_json(seq)},
                 {"frame_count", seq.frames.size()},
                 {"joint_count", seq.topology.joint_count()}};
  std::string out = detail::frame_file(kPoseBinaryMagic, header.dump());
  out.reserve(out.size() + seq.frames.size() * seq.topology.joint_count() * 24);
  for (const auto& frame : seq.frames)
    for (const auto& p : frame.coords)
      for (int k = 0; k < 3; ++k) detail::append_f64(out, p[k]);
  return out;
}

CanonicalDocument parse_canonical_binary(std::string_view bytes) {
  const auto framed = detail::split_framed(bytes, kPoseBinaryMagic);
  const json header = parse_json_text(framed.header);
  if (!header.is_object()) schema_error("header", "expected a JSON object");
  check_schema_version(header);
  const json& meta = require(header, "metadata", "header");
  PoseSequence seq = sequence_from_metadata(meta);

  const auto frame_count = require(header, "frame_count", "header").get<std::size_t>();
  const auto joint_count = require(header, "joint_count", "header").get<std::size_t>();
  if (joint_count != seq.topology.joint_count())
    schema_error("header.joint_count", "does not match metadata.joint_names");
  const std::size_t expected = frame_count * joint_count * 3 * sizeof(double);
  if (framed.payload.size() != expected)
    throw Error(ErrorKind::kParse, "payload holds " + std::to_string(framed.payload.size()) +
                                       " bytes, header implies " + std::to_string(expected));
  const auto indices = read_frame_indices(header, frame_count);
  const char* p = framed.payload.data();
  seq.frames.resize(frame_count);
  for (std::size_t f = 0; f < frame_count; ++f) {
    seq.frames[f].frame_index = indices[f];
    seq.frames[f].coords.resize(joint_count);
    for (auto& c : seq.frames[f].coords) {
      for (int k = 0; k < 3; ++k, p += 8) c[k] = detail::load_f64(p);
    }
  }
  finish(seq);
  return {std::move(seq), meta};
}

void write_canonical(const PoseSequence& seq, const std::filesystem::path& path,
                     const json& extra_metadata, PoseFileFormat format) {
  const std::string bytes = format == PoseFileFormat::kBinary
                                ? to_canonical_binary(seq, extra_metadata)
                                : to_canonical_json(seq, extra_metadata);
  write_file_atomic(path, bytes);
}

CanonicalDocument read_canonical_document(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    if (bytes.compare(0, kPoseBinaryMagic.size(), kPoseBinaryMagic) == 0)
      return parse_canonical_binary(bytes);
    return parse_canonical_json(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

PoseSequence read_canonical(const std::filesystem::path& path) {
  return read_canonical_document(path).sequence;
}

PoseSequence remap_joints(const PoseSequence& seq, const JointMap& map,
                          const SkeletonTopology& target) {
  const auto& source_names = seq.topology.joint_names();
  std::vector<std::optional<std::size_t>> source_of(target.joint_count());
  for (std::size_t s = 0; s < source_names.size(); ++s) {
    const auto it = map.find(source_names[s]);
    const std::string& mapped = it == map.end() ? source_names[s] : it->second;
    if (!target.has_joint(mapped)) continue;
    const std::size_t t = target.index_of(mapped);
    if (source_of[t])
      throw Error(ErrorKind::kSchema, "joints '" + source_names[*source_of[t]] + "' and '" +
                                          source_names[s] + "' both map to '" + mapped + "'");
    source_of[t] = s;
  }
  for (std::size_t t = 0; t < target.joint_count(); ++t) {
    if (!source_of[t])
      throw Error(ErrorKind::kSchema, "missing joint '" + target.joint_names()[t] +
                                          "' after applying the joint map");
  }

  PoseSequence out = seq;
  out.topology = target;
  for (auto& frame : out.frames) {
    if (frame.coords.size() != source_names.size())
      throw Error(ErrorKind::kShapeMismatch, "frame joint count does not match source topology");
    std::vector<Vec3> coords(target.joint_count());
    for (std::size_t t = 0; t < coords.size(); ++t) coords[t] = frame.coords[*source_of[t]];
    frame.coords = std::move(coords);
  }
  return out;
}

}  // namespace augmotion
