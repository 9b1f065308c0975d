#include <doctest.h>

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "augmotion/canonical_io.hpp"
#include "augmotion/file_util.hpp"
#include "augmotion/harmonize.hpp"
#include "augmotion/volume_io.hpp"
#include "cli.hpp"
#include "test_support.hpp"

using namespace augmotion;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string p(const testing::TempDir& d, const std::string& name) { return (d / name).string(); }

void check_error(const Run& r, int code) {
  CHECK(r.code == code);
  const json e = json::parse(r.err);
  CHECK(e["error"]["exit_code"] == code);
  CHECK(e["error"]["message"].get<std::string>().size() > 0);
  CHECK(e["error"].contains("kind"));
}

}  // namespace

TEST_CASE("synth is deterministic") {
  testing::TempDir d;
  REQUIRE(run({"synth", "--seed", "0", "--frames", "64", "-o", p(d, "a.json")}).code == 0);
  REQUIRE(run({"synth", "--seed", "0", "--frames", "64", "-o", p(d, "b.json")}).code == 0);
  CHECK(read_file(d / "a.json") == read_file(d / "b.json"));
  REQUIRE(run({"synth", "--seed", "1", "--frames", "64", "-o", p(d, "c.json")}).code == 0);
  CHECK(read_file(d / "a.json") != read_file(d / "c.json"));
  CHECK(read_canonical(d / "a.json").frames.size() == 64);
}

TEST_CASE("harmonize then keyframe lands on the targets") {
  testing::TempDir d;
  REQUIRE(run({"synth", "--seed", "3", "--frames", "48", "-o", p(d, "a.json")}).code == 0);
  const auto h = run({"harmonize", p(d, "a.json"), "-o", p(d, "b.json")});
  REQUIRE(h.code == 0);
  const json summary = json::parse(h.out);
  CHECK(summary["scale_ratios"]["n_frames"] == 48);

  const json sidecar = json::parse(read_file(d / "b.json.transform.json"));
  CHECK(sidecar["scale"].get<double>() > 0.0);
  CHECK(sidecar["rotation"].size() == 3);

  const auto doc = read_canonical_document(d / "b.json");
  CHECK(doc.sequence.units == "universal");
  CHECK(doc.metadata["harmonization"] == sidecar);
  CHECK(doc.metadata["provenance"]["command"] == "harmonize");

  const auto k = run({"keyframe", p(d, "b.json")});
  REQUIRE(k.code == 0);
  const json key = json::parse(k.out);
  const auto targets = canonical_reference_targets();
  const auto& anchor = key["anchor"]["reference_triple"];
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 3; ++c) CHECK(std::abs(anchor[i][c].get<double>() - targets[i][c]) < 1e-6);
  CHECK(key["anchor"]["frame_index"] == sidecar["key_frame"]);
  CHECK(key["cluster_sizes"].size() == 3);
}

TEST_CASE("noisy key frames land within the fit residual") {
  testing::TempDir d;
  REQUIRE(run({"synth", "--seed", "3", "--frames", "48", "--noise", "2", "-o", p(d, "a.json")}).code == 0);
  REQUIRE(run({"harmonize", p(d, "a.json"), "-o", p(d, "b.json")}).code == 0);
  const json sidecar = json::parse(read_file(d / "b.json.transform.json"));
  const double residual = sidecar["key_frame_rmsd"].get<double>();
  CHECK(residual > 0.0);
  const json key = json::parse(run({"keyframe", p(d, "b.json")}).out);
  // worst point error is at most sqrt(3) times the RMSD over three points
  CHECK(key["anchor"]["max_target_error"].get<double>() <= std::sqrt(3.0) * residual + 1e-12);
}

TEST_CASE("encode, decode and eval round trip") {
  testing::TempDir d;
  REQUIRE(run({"synth", "--seed", "5", "--frames", "6", "-o", p(d, "a.json")}).code == 0);
  REQUIRE(run({"harmonize", p(d, "a.json"), "-o", p(d, "b.json")}).code == 0);
  const auto enc = run({"encode", p(d, "b.json"), "-o", p(d, "v.vol"), "--dims", "32x32x32",
                        "--frame-range", "1:3", "--dump-csv", p(d, "v.csv")});
  REQUIRE(enc.code == 0);
  const json info = json::parse(enc.out);
  CHECK(info["frames"] == 3);
  CHECK(info["c"].get<double>() == doctest::Approx(2 * info["sigma_main"].get<double>()));
  CHECK(std::filesystem::file_size(d / "v.csv") > 0);

  REQUIRE(run({"decode", p(d, "v.vol"), "-o", p(d, "c.json")}).code == 0);
  const auto decoded = read_canonical(d / "c.json");
  CHECK(decoded.frames.size() == 3);
  CHECK(decoded.frames[0].frame_index == 1);

  const auto ev = run({"eval", "--pred", p(d, "c.json"), "--gt", p(d, "b.json")});
  REQUIRE(ev.code == 0);
  const json report = json::parse(ev.out);
  CHECK(report["units"] == "universal");
  CHECK(report["per_frame"].size() == 3);
  CHECK(report["mpjpe"].get<double>() <= info["half_voxel_diagonal"].get<double>());
  CHECK(report["p_mpjpe"].get<double>() <= report["mpjpe"].get<double>() + 1e-9);
}

TEST_CASE("flags override config which overrides defaults") {
  testing::TempDir d;
  REQUIRE(run({"synth", "--seed", "2", "--frames", "2", "-o", p(d, "a.json")}).code == 0);
  write_file_atomic(d / "cfg.json", json({{"dims", "20x20x20"}, {"side_schedule", "squared_index"},
                                          {"sigma_main", 60.0}})
                                        .dump());
  REQUIRE(run({"encode", p(d, "a.json"), "-o", p(d, "v.vol"), "--config", p(d, "cfg.json"),
               "--sigma-main", "80"})
              .code == 0);
  const auto vol = read_volume_file(d / "v.vol");
  CHECK(vol.volumes[0].spec().dims == std::array<std::size_t, 3>{20, 20, 20});
  CHECK(vol.params.sigma_main == 80.0);
  CHECK(vol.params.c == 160.0);
  CHECK(vol.params.schedule == SideSchedule::kSquaredIndex);
  const auto& prov = vol.pose_metadata["provenance"];
  CHECK(prov["config"]["sigma_main"] == 80.0);
  CHECK(prov["config"]["side_schedule"] == "squared_index");
  CHECK(prov["config"]["window_len"] == 16);
}

TEST_CASE("windows lists and writes clips") {
  testing::TempDir d;
  REQUIRE(run({"synth", "--frames", "64", "-o", p(d, "a.json")}).code == 0);
  const auto w = run({"windows", p(d, "a.json"), "--write-clips", p(d, "clips")});
  REQUIRE(w.code == 0);
  const json list = json::parse(w.out);
  REQUIRE(list["windows"].size() == 4);
  CHECK(list["windows"][3]["start"] == 48);
  const auto clip = read_canonical(d / "clips" / "clip_00002.json");
  CHECK(clip.frames.size() == 16);
  CHECK(clip.frames[0].frame_index == 32);

  const auto w2 = run({"windows", p(d, "a.json"), "--window-len", "20", "--step", "10"});
  CHECK(json::parse(w2.out)["windows"].size() == 5);
  check_error(run({"windows", p(d, "a.json"), "--window-len", "65"}), cli::kExitConfig);
}

TEST_CASE("directory input is processed file by file") {
  testing::TempDir d;
  std::filesystem::create_directories(d / "in");
  for (int s = 0; s < 3; ++s)
    REQUIRE(run({"synth", "--seed", std::to_string(s), "--frames", "20", "-o",
                 p(d, "in/seq" + std::to_string(s) + ".json")})
                .code == 0);
  const auto h = run({"harmonize", p(d, "in"), "-o", p(d, "out")});
  REQUIRE(h.code == 0);
  CHECK(json::parse(h.out)["outputs"].size() == 3);
  for (int s = 0; s < 3; ++s) {
    CHECK(std::filesystem::exists(d / "out" / ("seq" + std::to_string(s) + ".json")));
    CHECK(std::filesystem::exists(d / "out" / ("seq" + std::to_string(s) + ".json.transform.json")));
  }
}

TEST_CASE("exit codes") {
  testing::TempDir d;
  REQUIRE(run({"synth", "--frames", "8", "-o", p(d, "a.json")}).code == 0);

  check_error(run({"frobnicate"}), cli::kExitUsage);
  check_error(run({"synth", "--no-such-flag", "-o", p(d, "x.json")}), cli::kExitUsage);
  check_error(run({"keyframe", p(d, "missing.json")}), cli::kExitIo);
  check_error(run({"encode", p(d, "a.json"), "-o", p(d, "v.vol"), "--sigma-main", "-1"}),
              cli::kExitConfig);
  check_error(run({"encode", p(d, "a.json"), "-o", p(d, "v.vol"), "--dims", "4x4"}),
              cli::kExitConfig);
  check_error(run({"encode", p(d, "a.json"), "-o", p(d, "v.vol"), "--mode", "stacked"}),
              cli::kExitConfig);

  write_file_atomic(d / "broken.json", "{\"schema_version\": 1, \"metadata\": ");
  const auto broken = run({"keyframe", p(d, "broken.json")});
  check_error(broken, cli::kExitBadInput);
  CHECK(broken.err.find("line") != std::string::npos);

  auto seq = read_canonical(d / "a.json");
  for (auto& f : seq.frames) f.coords[14] = f.coords[11];
  write_canonical(seq, d / "flat.json");
  check_error(run({"harmonize", p(d, "flat.json"), "-o", p(d, "h.json")}), cli::kExitNumerical);

  REQUIRE(run({"encode", p(d, "a.json"), "-o", p(d, "f.vol"), "--dims", "16x16x16", "--mode",
               "fused", "--frame-range", "0:1"})
              .code == 0);
  check_error(run({"decode", p(d, "f.vol"), "-o", p(d, "x.json")}), cli::kExitConfig);
}

TEST_CASE("help lists the exit codes") {
  const auto r = run({"--help"});
  CHECK(r.code == 0);
  for (const char* needle : {"Exit codes", "usage error", "I/O error", "self-test failure", "AUGMOTION_LOG"})
    CHECK(r.out.find(needle) != std::string::npos);
}

TEST_CASE("self tests pass") {
  const auto a = run({"attn-selftest", "--seed", "3"});
  CHECK(a.code == 0);
  CHECK(json::parse(a.out)["passed"] == true);
  const auto k = run({"kabsch-selftest", "--trials", "200"});
  CHECK(k.code == 0);
  CHECK(json::parse(k.out)["passed"] == true);
}
