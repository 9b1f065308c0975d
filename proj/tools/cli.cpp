#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "augmotion/canonical_io.hpp"
#include "augmotion/clips.hpp"
#include "augmotion/error.hpp"
#include "augmotion/file_util.hpp"
#include "augmotion/harmonize.hpp"
#include "augmotion/heatpose.hpp"
#include "augmotion/metrics.hpp"
#include "augmotion/selftest.hpp"
#include "augmotion/synthetic.hpp"
#include "augmotion/volume_io.hpp"

namespace augmotion::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  1  internal error\n"
    "  2  usage error (unknown subcommand or flag, malformed arguments)\n"
    "  3  I/O error (missing input file, unwritable output)\n"
    "  4  configuration violation (non-positive sigma, bad dims, unknown mode)\n"
    "  5  invalid input data (parse, schema or validation failure)\n"
    "  6  numerical failure (degenerate pose, joint outside volume, flat channel)\n"
    "  7  self-test failure\n"
    "Errors are reported on stderr as {\"error\": {\"kind\", \"message\", \"exit_code\"}}.\n"
    "Set AUGMOTION_LOG=trace|debug|info|warn|error|off to control log output (default warn).";

/// Usage errors raised after CLI11 parsing succeeded.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Value given to a config key that does not satisfy its constraints.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return kExitIo;
    case ErrorKind::kInvalidArgument: return kExitConfig;
    case ErrorKind::kParse:
    case ErrorKind::kSchema:
    case ErrorKind::kValidation:
    case ErrorKind::kUnknownJoint:
    case ErrorKind::kEmptyInput:
    case ErrorKind::kShapeMismatch:
    case ErrorKind::kSpecMismatch:
    case ErrorKind::kNonFinite: return kExitBadInput;
    case ErrorKind::kDegenerate:
    case ErrorKind::kOutOfBounds:
    case ErrorKind::kFlatChannel: return kExitNumerical;
  }
  return kExitInternal;
}

int report_error(std::ostream& err, std::string_view kind, const std::string& message, int code) {
  json e = {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
  err << e.dump() << '\n';
  return code;
}

void configure_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_logger_mt("augmotion");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
  });
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("AUGMOTION_LOG")) level = spdlog::level::from_str(env);
  spdlog::set_level(level);
}

std::array<std::size_t, 3> parse_dims(const std::string& text) {
  std::array<std::size_t, 3> dims{};
  std::istringstream is(text);
  char x1 = 0, x2 = 0;
  long long w = 0, h = 0, d = 0;
  if (!(is >> w >> x1 >> h >> x2 >> d) || (x1 != 'x' && x1 != 'X') || (x2 != 'x' && x2 != 'X') ||
      !is.eof() || w <= 0 || h <= 0 || d <= 0)
    throw ConfigError("dims must look like WxHxD with positive integers, got '" + text + "'");
  dims = {static_cast<std::size_t>(w), static_cast<std::size_t>(h), static_cast<std::size_t>(d)};
  return dims;
}

Vec3 parse_vec3(const std::string& text) {
  std::istringstream is(text);
  double x = 0, y = 0, z = 0;
  char c1 = 0, c2 = 0;
  if (!(is >> x >> c1 >> y >> c2 >> z) || c1 != ',' || c2 != ',')
    throw ConfigError("expected x,y,z, got '" + text + "'");
  return {x, y, z};
}

/// Flags shared by every subcommand; unset flags fall back to the --config
/// file and then to documented defaults.
struct Flags {
  std::optional<double> sigma_main, c;
  std::optional<std::string> dims, mode, side_schedule;
  std::optional<std::size_t> window_len, step;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> config;
  std::string output;
  // synth
  std::optional<std::size_t> frames;
  std::optional<double> fps, noise, cycle_hz, limb_amplitude, torso_amplitude;
  std::optional<std::string> drift;
};

struct RunConfig {
  std::optional<double> sigma_main;  // world units; derived from the volume when absent
  std::optional<double> c;           // defaults to 2 * sigma_main
  std::array<std::size_t, 3> dims{64, 64, 64};
  std::size_t window_len = kDefaultWindowLength;
  std::size_t step = kDefaultWindowStep;
  std::uint64_t seed = 0;
  VolumeMode mode = VolumeMode::kChannel;
  SideSchedule schedule = SideSchedule::kAfterMain;
  SynthSpec synth;

  json to_json() const {
    json j = {{"dims", dims},
              {"window_len", window_len},
              {"step", step},
              {"seed", seed},
              {"mode", to_string(mode)},
              {"side_schedule", to_string(schedule)}};
    j["sigma_main"] = sigma_main ? json(*sigma_main) : json(nullptr);
    j["c"] = c ? json(*c) : json(nullptr);
    return j;
  }
};

template <typename T>
std::optional<T> config_value(const json& cfg, const char* key) {
  const auto it = cfg.find(key);
  if (it == cfg.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> pick(const std::optional<T>& flag, const json& cfg, const char* key) {
  if (flag) return flag;
  return config_value<T>(cfg, key);
}

RunConfig resolve(const Flags& flags) {
  json cfg = json::object();
  if (flags.config) {
    const std::string text = read_file(*flags.config);
    try {
      cfg = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::kParse, "config file '" + *flags.config + "': " + e.what());
    }
    if (!cfg.is_object()) throw ConfigError("config file must hold a JSON object");
  }

  RunConfig rc;
  rc.sigma_main = pick(flags.sigma_main, cfg, "sigma_main");
  rc.c = pick(flags.c, cfg, "c");
  if (rc.sigma_main && !(*rc.sigma_main > 0.0)) throw ConfigError("sigma_main must be positive");
  if (rc.c && !(*rc.c > 0.0)) throw ConfigError("c must be positive");

  if (flags.dims) {
    rc.dims = parse_dims(*flags.dims);
  } else if (cfg.contains("dims")) {
    const auto& d = cfg["dims"];
    if (d.is_string()) {
      rc.dims = parse_dims(d.get<std::string>());
    } else {
      const auto v = config_value<std::vector<long long>>(cfg, "dims").value_or(std::vector<long long>{});
      if (v.size() != 3 || *std::min_element(v.begin(), v.end()) <= 0)
        throw ConfigError("config dims must be three positive integers");
      rc.dims = {static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]),
                 static_cast<std::size_t>(v[2])};
    }
  }

  rc.window_len = pick(flags.window_len, cfg, "window_len").value_or(rc.window_len);
  rc.step = pick(flags.step, cfg, "step").value_or(rc.step);
  if (rc.window_len == 0 || rc.step == 0) throw ConfigError("window_len and step must be positive");
  rc.seed = pick(flags.seed, cfg, "seed").value_or(0);
  try {
    if (auto m = pick(flags.mode, cfg, "mode")) rc.mode = volume_mode_from_string(*m);
    if (auto s = pick(flags.side_schedule, cfg, "side_schedule"))
      rc.schedule = side_schedule_from_string(*s);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  rc.synth.seed = rc.seed;
  rc.synth.frame_count = pick(flags.frames, cfg, "frames").value_or(rc.synth.frame_count);
  rc.synth.fps = pick(flags.fps, cfg, "fps").value_or(rc.synth.fps);
  rc.synth.noise_sigma = pick(flags.noise, cfg, "noise_sigma").value_or(rc.synth.noise_sigma);
  rc.synth.cycle_hz = pick(flags.cycle_hz, cfg, "cycle_hz").value_or(rc.synth.cycle_hz);
  rc.synth.limb_amplitude =
      pick(flags.limb_amplitude, cfg, "limb_amplitude").value_or(rc.synth.limb_amplitude);
  rc.synth.torso_amplitude =
      pick(flags.torso_amplitude, cfg, "torso_amplitude").value_or(rc.synth.torso_amplitude);
  if (flags.drift) {
    rc.synth.drift = parse_vec3(*flags.drift);
  } else if (auto d = config_value<std::vector<double>>(cfg, "drift")) {
    if (d->size() != 3) throw ConfigError("config drift must have three components");
    rc.synth.drift = Vec3((*d)[0], (*d)[1], (*d)[2]);
  }
  if (rc.synth.frame_count == 0) throw ConfigError("frames must be >= 1");
  if (!(rc.synth.fps > 0.0)) throw ConfigError("fps must be positive");
  if (!(rc.synth.noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
  return rc;
}

void add_common(CLI::App* app, Flags& f, bool volume_flags) {
  app->add_option("--seed", f.seed, "Random seed (default 0)");
  app->add_option("--config", f.config, "JSON config file; flags take precedence");
  if (volume_flags) {
    app->add_option("--sigma-main", f.sigma_main,
                    "Main Gaussian sigma in pose units (default 1.5 voxel edges)");
    app->add_option("--c", f.c, "Transitional point spacing in pose units (default 2*sigma-main)");
    app->add_option("--dims", f.dims, "Volume size WxHxD (default 64x64x64)");
    app->add_option("--mode", f.mode, "channel | fused (default channel)");
    app->add_option("--side-schedule", f.side_schedule,
                    "after_main | squared_index (default after_main)");
  }
}

json matrix_json(const Mat3& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

void emit(const json& j, const std::string& output, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (output.empty() || output == "-") {
    out << text;
  } else {
    write_file_atomic(output, text);
  }
}

json provenance(std::string_view command, const RunConfig& rc, const json& extra = json::object()) {
  json p = {{"command", command}, {"config", rc.to_json()}};
  for (const auto& [k, v] : extra.items()) p[k] = v;
  return p;
}

/// Metadata keys carried from an input file into derived outputs.
json carried_metadata(const json& meta) {
  json out = json::object();
  for (const char* key : {"joint_map", "harmonization"})
    if (meta.contains(key)) out[key] = meta[key];
  return out;
}

// ---------------------------------------------------------------- subcommands

int cmd_synth(const RunConfig& rc, const std::string& output, bool binary, std::ostream& out) {
  if (output.empty()) throw UsageError("synth requires -o/--output");
  const PoseSequence seq = generate_synthetic(rc.synth);
  json synth = {{"seed", rc.synth.seed},
                {"frames", rc.synth.frame_count},
                {"fps", rc.synth.fps},
                {"cycle_hz", rc.synth.cycle_hz},
                {"limb_amplitude", rc.synth.limb_amplitude},
                {"torso_amplitude", rc.synth.torso_amplitude},
                {"drift", vec_json(rc.synth.drift)},
                {"noise_sigma", rc.synth.noise_sigma},
                {"upright_frame", synthetic_upright_frame(rc.synth)}};
  write_canonical(seq, output, {{"provenance", provenance("synth", rc)}, {"synthetic", synth}},
                  binary ? PoseFileFormat::kBinary : PoseFileFormat::kJson);
  spdlog::info("wrote {} frames to {}", seq.frames.size(), output);
  (void)out;
  return kExitOk;
}

struct HarmonizeJob {
  fs::path input;
  fs::path output;
};

json harmonize_one(const HarmonizeJob& job, const RunConfig& rc, bool remap) {
  auto doc = read_canonical_document(job.input);
  PoseSequence seq = std::move(doc.sequence);
  if (remap) {
    JointMap map;
    if (const auto it = doc.metadata.find("joint_map"); it != doc.metadata.end())
      map = it->get<JointMap>();
    seq = remap_joints(seq, map, SkeletonTopology::h36m17());
  }
  if (seq.units == kUnitsUniversal) spdlog::warn("{} is already in universal units", job.input.string());

  const KeyFrameResult key = select_key_frame(seq, rc.seed);
  const HarmonizeResult result = harmonize_sequence(seq, key.frame_index);
  const auto landed = reference_points(result.sequence.frames[key.frame_index], result.sequence.topology);
  const auto targets = canonical_reference_targets();
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) worst = std::max(worst, (landed[i] - targets[i]).norm());

  json record = {{"source", job.input.string()},
                 {"key_frame", key.frame_index},
                 {"key_frame_index", seq.frames[key.frame_index].frame_index},
                 {"cluster_sizes", key.cluster_sizes},
                 {"scale", result.scale},
                 {"rotation", matrix_json(result.transform.rotation)},
                 {"translation", vec_json(result.transform.translation)},
                 {"key_frame_rmsd", result.key_frame_rmsd},
                 {"key_frame_max_target_error", worst}};
  json extra = carried_metadata(doc.metadata);
  extra["harmonization"] = record;
  extra["provenance"] = provenance("harmonize", rc, {{"input", job.input.string()}});
  write_canonical(result.sequence, job.output, extra);

  fs::path sidecar = job.output;
  sidecar += ".transform.json";
  write_file_atomic(sidecar, record.dump(2) + "\n");
  spdlog::info("harmonized {} -> {} (key frame {})", job.input.string(), job.output.string(),
               key.frame_index);
  return record;
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && (entry.path().extension() == ".json" ||
                                        entry.path().extension() == ".bin"))
          found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(p)) {
      files.push_back(p);
    } else {
      throw Error(ErrorKind::kIo, "input '" + in + "' does not exist");
    }
  }
  if (files.empty()) throw UsageError("no input files");
  return files;
}

int cmd_harmonize(const RunConfig& rc, const std::vector<std::string>& inputs,
                  const std::string& output, bool remap, std::ostream& out) {
  if (output.empty()) throw UsageError("harmonize requires -o/--output");
  const auto files = expand_inputs(inputs);
  const bool to_dir = files.size() > 1 || fs::is_directory(inputs.front()) || fs::is_directory(output);

  std::vector<HarmonizeJob> jobs;
  if (to_dir) {
    fs::create_directories(output);
    for (const auto& f : files) jobs.push_back({f, fs::path(output) / f.filename()});
  } else {
    jobs.push_back({files.front(), output});
  }

  std::vector<std::future<json>> pending;
  for (const auto& job : jobs)
    pending.push_back(std::async(std::launch::async, harmonize_one, job, std::cref(rc), remap));
  json records = json::array();
  for (auto& f : pending) records.push_back(f.get());

  std::vector<PoseSequence> originals;
  for (const auto& job : jobs) {
    auto seq = read_canonical(job.input);
    if (remap) {
      auto doc = read_canonical_document(job.input);
      JointMap map;
      if (doc.metadata.contains("joint_map")) map = doc.metadata["joint_map"].get<JointMap>();
      seq = remap_joints(doc.sequence, map, SkeletonTopology::h36m17());
    }
    originals.push_back(std::move(seq));
  }
  const ScaleRatios ratios = compute_scale_ratios(originals);
  json summary = {{"outputs", records},
                  {"scale_ratios",
                   {{"m_s", ratios.m_s},
                    {"m_sp", ratios.m_sp},
                    {"ratio", ratios.ratio()},
                    {"n_frames", ratios.n_frames_used}}}};
  out << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_keyframe(const RunConfig& rc, const std::string& input, const std::string& output,
                 std::ostream& out) {
  const auto doc = read_canonical_document(input);
  const auto& seq = doc.sequence;
  const KeyFrameResult key = select_key_frame(seq, rc.seed);
  json triple = json::array();
  for (const auto& p : reference_points(seq.frames[key.frame_index], seq.topology))
    triple.push_back(vec_json(p));
  json result = {{"frame_index", key.frame_index},
                 {"source_frame_index", seq.frames[key.frame_index].frame_index},
                 {"cluster_sizes", key.cluster_sizes},
                 {"centroid", key.centroid},
                 {"feature_values", key.feature_values},
                 {"reference_triple", triple},
                 {"units", seq.units}};

  // A harmonized file records the frame that anchored its transform.
  if (const auto it = doc.metadata.find("harmonization"); it != doc.metadata.end()) {
    const auto anchor = it->at("key_frame").get<std::size_t>();
    if (anchor < seq.frames.size()) {
      const auto pts = reference_points(seq.frames[anchor], seq.topology);
      const auto targets = canonical_reference_targets();
      json anchor_triple = json::array();
      double worst = 0.0;
      for (int i = 0; i < 3; ++i) {
        anchor_triple.push_back(vec_json(pts[i]));
        worst = std::max(worst, (pts[i] - targets[i]).norm());
      }
      result["anchor"] = {{"frame_index", anchor},
                          {"reference_triple", anchor_triple},
                          {"max_target_error", worst}};
    }
  }
  emit(result, output, out);
  return kExitOk;
}

int cmd_windows(const RunConfig& rc, const std::string& input, const std::string& output,
                const std::string& clips_dir, std::ostream& out) {
  const auto doc = read_canonical_document(input);
  const auto windows = sliding_windows(doc.sequence, rc.window_len, rc.step);
  json list = json::array();
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    json entry = {{"start", w.start_frame},
                  {"length", w.length},
                  {"first_frame_index", doc.sequence.frames[w.start_frame].frame_index}};
    if (!clips_dir.empty()) {
      fs::create_directories(clips_dir);
      char name[32];
      std::snprintf(name, sizeof name, "clip_%05zu.json", i);
      const fs::path path = fs::path(clips_dir) / name;
      json extra = carried_metadata(doc.metadata);
      extra["provenance"] =
          provenance("windows", rc, {{"input", input}, {"clip", i}, {"start", w.start_frame}});
      write_canonical(extract_clip(doc.sequence, w), path, extra);
      entry["path"] = path.string();
    }
    list.push_back(entry);
  }
  emit({{"frame_count", doc.sequence.frames.size()},
        {"window_len", rc.window_len},
        {"step", rc.step},
        {"windows", list}},
       output, out);
  return kExitOk;
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& text, std::size_t frame_count) {
  if (text.empty()) return {0, frame_count};
  const auto colon = text.find(':');
  try {
    const std::size_t start = std::stoull(text.substr(0, colon));
    const std::size_t count =
        colon == std::string::npos ? 1 : std::stoull(text.substr(colon + 1));
    if (count == 0 || start + count > frame_count)
      throw ConfigError("frame range '" + text + "' outside a sequence of " +
                        std::to_string(frame_count) + " frames");
    return {start, count};
  } catch (const std::logic_error&) {
    throw ConfigError("frame range must look like START:COUNT, got '" + text + "'");
  }
}

void dump_csv(const VolumeFile& file, const std::string& path) {
  // One z-slice per channel, through that channel's peak voxel.
  std::ostringstream os;
  os << "frame_index,channel,x,y,z,value\n";
  for (std::size_t f = 0; f < file.volumes.size(); ++f) {
    const auto& vol = file.volumes[f];
    const auto& spec = vol.spec();
    for (std::size_t c = 0; c < vol.channel_count(); ++c) {
      const auto ch = vol.channel(c);
      const auto peak = static_cast<std::size_t>(std::max_element(ch.begin(), ch.end()) - ch.begin());
      const std::size_t z = peak / (spec.dims[0] * spec.dims[1]);
      const std::string name = vol.mode() == VolumeMode::kChannel ? vol.joint_names()[c] : "fused";
      for (std::size_t y = 0; y < spec.dims[1]; ++y)
        for (std::size_t x = 0; x < spec.dims[0]; ++x)
          os << file.frame_indices[f] << ',' << name << ',' << x << ',' << y << ',' << z << ','
             << json(vol.at(c, x, y, z)).dump() << '\n';
    }
  }
  write_file_atomic(path, os.str());
}

int cmd_encode(const RunConfig& rc, const std::string& input, const std::string& output,
               const std::string& range, const std::string& csv, std::ostream& out) {
  if (output.empty()) throw UsageError("encode requires -o/--output");
  const auto doc = read_canonical_document(input);
  const auto& seq = doc.sequence;
  const auto [start, count] = parse_range(range, seq.frames.size());
  const std::span<const PoseFrame> frames(seq.frames.data() + start, count);

  VolumeSpec spec;
  HeatParams params;
  params.schedule = rc.schedule;
  if (rc.sigma_main) {
    params.sigma_main = *rc.sigma_main;
    spec = padded_volume_spec(frames, rc.dims, kDefaultPadSigmas * params.sigma_main);
  } else {
    spec = default_volume_spec(frames, rc.dims, kDefaultSigmaVoxels, kDefaultPadSigmas);
    params.sigma_main = kDefaultSigmaVoxels * spec.voxel_edge().maxCoeff();
  }
  params.c = rc.c.value_or(2.0 * params.sigma_main);

  VolumeFile file;
  file.params = params;
  json meta = pose_metadata_json(seq, carried_metadata(doc.metadata));
  meta["provenance"] = provenance("encode", rc, {{"input", input},
                                                 {"sigma_main", params.sigma_main},
                                                 {"c", params.c}});
  file.pose_metadata = meta;
  for (const auto& frame : frames) {
    file.volumes.push_back(encode(frame, seq.topology, spec, params, rc.mode));
    file.frame_indices.push_back(frame.frame_index);
  }
  write_volume_file(file, output);
  if (!csv.empty()) dump_csv(file, csv);
  out << json({{"output", output},
               {"frames", file.volumes.size()},
               {"dims", spec.dims},
               {"voxel_edge", spec.voxel_edge().maxCoeff()},
               {"half_voxel_diagonal", 0.5 * spec.voxel_diagonal()},
               {"sigma_main", params.sigma_main},
               {"c", params.c},
               {"mode", to_string(rc.mode)}})
             .dump(2)
      << '\n';
  return kExitOk;
}

int cmd_decode(const RunConfig& rc, const std::string& input, const std::string& output,
               std::ostream& out) {
  if (output.empty()) throw UsageError("decode requires -o/--output");
  const VolumeFile file = read_volume_file(input);
  PoseSequence seq = sequence_from_pose_metadata(file.pose_metadata);
  if (seq.topology.joint_names() != file.volumes.front().joint_names())
    throw Error(ErrorKind::kSchema, "volume joint names disagree with its pose metadata");
  for (std::size_t f = 0; f < file.volumes.size(); ++f)
    seq.frames.push_back({decode(file.volumes[f]), file.frame_indices[f]});

  json extra = carried_metadata(file.pose_metadata);
  extra["provenance"] = provenance("decode", rc, {{"input", input}});
  write_canonical(seq, output, extra);
  (void)out;
  return kExitOk;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path, const std::string& output,
             std::ostream& out) {
  const auto pred = read_canonical(pred_path);
  const auto gt = read_canonical(gt_path);
  const EvalReport report = evaluate_sequences(pred, gt);
  json per_frame = json::array();
  for (const auto& s : report.per_frame)
    per_frame.push_back({{"frame_index", s.frame_index}, {"mpjpe", s.mpjpe}, {"p_mpjpe", s.p_mpjpe}});
  emit({{"mpjpe", report.mpjpe},
        {"p_mpjpe", report.p_mpjpe},
        {"units", report.units},
        {"frames", report.per_frame.size()},
        {"per_frame", per_frame}},
       output, out);
  return kExitOk;
}

int emit_selftest(const SelfTestReport& report, const std::string& output, std::ostream& out) {
  json checks = json::array();
  for (const auto& c : report.checks)
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"measured", c.measured},
                      {"tolerance", c.tolerance},
                      {"detail", c.detail}});
  emit({{"suite", report.suite}, {"passed", report.passed()}, {"checks", checks}}, output, out);
  return report.passed() ? kExitOk : kExitSelfTest;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging();

  CLI::App app{"augmotion: pose dataset harmonization, HeatPose volumes and evaluation", "augmotion"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);
  Flags f;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic walker sequence");
  add_common(synth, f, false);
  bool binary = false;
  synth->add_option("-o,--output", f.output, "Output canonical pose file")->required();
  synth->add_option("--frames", f.frames, "Frame count (default 64)");
  synth->add_option("--fps", f.fps, "Frames per second (default 50)");
  synth->add_option("--noise", f.noise, "Gaussian coordinate noise sigma in mm (default 0)");
  synth->add_option("--drift", f.drift, "Pelvis drift velocity x,y,z in mm/s (default 0,0,0)");
  synth->add_option("--cycle-hz", f.cycle_hz, "Gait cycle frequency (default 1)");
  synth->add_option("--limb-amplitude", f.limb_amplitude, "Limb swing in radians (default 0.5)");
  synth->add_option("--torso-amplitude", f.torso_amplitude, "Torso bend in radians (default 0.6)");
  synth->add_flag("--binary", binary, "Write the little-endian float64 binary variant");

  std::vector<std::string> inputs;
  bool remap = false;
  auto* harmonize = app.add_subcommand("harmonize", "Project sequences into universal coordinates");
  add_common(harmonize, f, false);
  harmonize->add_option("inputs", inputs, "Canonical pose files or directories")->required();
  harmonize->add_option("-o,--output", f.output, "Output file, or directory for several inputs")
      ->required();
  harmonize->add_flag("--remap-to-h36m", remap,
                      "Apply the file's metadata joint_map onto the 17-joint layout first");

  std::string input;
  auto* keyframe = app.add_subcommand("keyframe", "Print the k-means key frame as JSON");
  add_common(keyframe, f, false);
  keyframe->add_option("input", input, "Canonical pose file")->required();
  keyframe->add_option("-o,--output", f.output, "Write JSON here instead of stdout");

  std::string clips_dir;
  auto* windows = app.add_subcommand("windows", "List sliding-window clips");
  add_common(windows, f, false);
  windows->add_option("input", input, "Canonical pose file")->required();
  windows->add_option("--window-len", f.window_len, "Clip length in frames (default 16)");
  windows->add_option("--step", f.step, "Window step in frames (default 16)");
  windows->add_option("-o,--output", f.output, "Write JSON here instead of stdout");
  windows->add_option("--write-clips", clips_dir, "Directory to write each clip as a pose file");

  std::string range, csv;
  auto* enc = app.add_subcommand("encode", "Rasterise poses into HeatPose volumes");
  add_common(enc, f, true);
  enc->add_option("input", input, "Canonical pose file")->required();
  enc->add_option("-o,--output", f.output, "Output volume file")->required();
  enc->add_option("--frame-range", range, "START:COUNT subset of frames (default all)");
  enc->add_option("--dump-csv", csv, "Also write per-channel peak z-slices as CSV");

  auto* dec = app.add_subcommand("decode", "Recover joint coordinates from a volume file");
  add_common(dec, f, false);
  dec->add_option("input", input, "Volume file")->required();
  dec->add_option("-o,--output", f.output, "Output canonical pose file")->required();

  std::string pred_path, gt_path;
  auto* eval = app.add_subcommand("eval", "MPJPE and P-MPJPE of a prediction");
  add_common(eval, f, false);
  eval->add_option("--pred", pred_path, "Predicted canonical pose file")->required();
  eval->add_option("--gt", gt_path, "Ground-truth canonical pose file")->required();
  eval->add_option("-o,--output", f.output, "Write JSON here instead of stdout");

  std::size_t trials = 1000;
  auto* attn = app.add_subcommand("attn-selftest", "Run the attention kernel invariant suite");
  add_common(attn, f, false);
  attn->add_option("-o,--output", f.output, "Write JSON here instead of stdout");
  auto* kab = app.add_subcommand("kabsch-selftest", "Run the Kabsch recovery suite");
  add_common(kab, f, false);
  kab->add_option("--trials", trials, "Random recovery trials (default 1000)");
  kab->add_option("-o,--output", f.output, "Write JSON here instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return report_error(err, "usage", e.what(), kExitUsage);
  }

  try {
    const RunConfig rc = resolve(f);
    if (synth->parsed()) return cmd_synth(rc, f.output, binary, out);
    if (harmonize->parsed()) return cmd_harmonize(rc, inputs, f.output, remap, out);
    if (keyframe->parsed()) return cmd_keyframe(rc, input, f.output, out);
    if (windows->parsed()) return cmd_windows(rc, input, f.output, clips_dir, out);
    if (enc->parsed()) return cmd_encode(rc, input, f.output, range, csv, out);
    if (dec->parsed()) return cmd_decode(rc, input, f.output, out);
    if (eval->parsed()) return cmd_eval(pred_path, gt_path, f.output, out);
    if (attn->parsed()) return emit_selftest(run_attention_selftest(rc.seed), f.output, out);
    if (kab->parsed()) return emit_selftest(run_kabsch_selftest(rc.seed, trials), f.output, out);
    return report_error(err, "usage", "no subcommand", kExitUsage);
  } catch (const UsageError& e) {
    return report_error(err, "usage", e.what(), kExitUsage);
  } catch (const ConfigError& e) {
    return report_error(err, "config", e.what(), kExitConfig);
  } catch (const Error& e) {
    return report_error(err, to_string(e.kind()), e.what(), exit_code_for(e.kind()));
  } catch (const fs::filesystem_error& e) {
    return report_error(err, "io", e.what(), kExitIo);
  } catch (const std::exception& e) {
    return report_error(err, "internal", e.what(), kExitInternal);
  }
}

}  // namespace augmotion::cli
