#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "augmotion/error.hpp"
#include "augmotion/metrics.hpp"
#include "test_support.hpp"

using namespace augmotion;

namespace {

std::vector<Vec3> random_pose(std::mt19937_64& rng, double scale = 500.0) {
  std::vector<Vec3> p;
  for (int j = 0; j < 17; ++j) p.push_back(testing::random_vec(rng, scale));
  return p;
}

std::vector<Vec3> apply(const std::vector<Vec3>& pts, double s, const Mat3& r, const Vec3& t) {
  std::vector<Vec3> out;
  for (const auto& p : pts) out.push_back(s * (r * p) + t);
  return out;
}

double naive_mpjpe(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double sum = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    double sq = 0;
    for (int k = 0; k < 3; ++k) sq += (a[j][k] - b[j][k]) * (a[j][k] - b[j][k]);
    sum += std::sqrt(sq);
  }
  return sum / double(a.size());
}

}  // namespace

TEST_CASE("mpjpe basics") {
  std::mt19937_64 rng(1);
  const auto gt = random_pose(rng);
  CHECK(mpjpe(gt, gt) == 0.0);
  std::vector<Vec3> off;
  for (const auto& p : gt) off.push_back(p + Vec3(3, 4, 0));
  CHECK(mpjpe(off, gt) == 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_pose(rng), b = random_pose(rng);
    CHECK(std::abs(mpjpe(a, b) - naive_mpjpe(a, b)) < 1e-12 * naive_mpjpe(a, b));
  }
}

TEST_CASE("mpjpe is a pseudometric") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    CHECK(mpjpe(a, b) == doctest::Approx(mpjpe(b, a)).epsilon(1e-15));
    CHECK(mpjpe(a, c) <= mpjpe(a, b) + mpjpe(b, c) + 1e-9);
    CHECK(mpjpe(a, b) > 0.0);
  }
}

TEST_CASE("procrustes recovers a similarity") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pred = random_pose(rng);
    const Mat3 r0 = testing::rotation_from(rng);
    const Vec3 t0 = testing::random_vec(rng, 1000);
    const auto gt = apply(pred, 2.5, r0, t0);
    const auto sim = procrustes_align(pred, gt);
    CHECK(sim.scale == doctest::Approx(2.5).epsilon(1e-12));
    CHECK((sim.rotation - r0).norm() < 1e-9);
    std::vector<Vec3> aligned;
    for (const auto& p : pred) aligned.push_back(sim.apply(p));
    double sq = 0;
    for (std::size_t j = 0; j < gt.size(); ++j) sq += (aligned[j] - gt[j]).squaredNorm();
    CHECK(std::sqrt(sq / 17.0) < 1e-9);
  }
}

TEST_CASE("procrustes identity and pure scale") {
  std::mt19937_64 rng(4);
  const auto pred = random_pose(rng);
  auto sim = procrustes_align(pred, pred);
  CHECK(std::abs(sim.scale - 1.0) < 1e-12);
  CHECK(testing::max_abs(sim.rotation - Mat3::Identity()) < 1e-12);
  CHECK(sim.translation.norm() < 1e-12 * 500);

  Vec3 c = Vec3::Zero();
  for (const auto& p : pred) c += p / 17.0;
  std::vector<Vec3> half;
  for (const auto& p : pred) half.push_back(c + 0.5 * (p - c));
  sim = procrustes_align(pred, half);
  CHECK(std::abs(sim.scale - 0.5) < 1e-12);
  CHECK(testing::max_abs(sim.rotation - Mat3::Identity()) < 1e-12);
}

TEST_CASE("p_mpjpe of an exactly alignable pair is zero") {
  std::mt19937_64 rng(5);
  const auto gt = random_pose(rng);
  const auto pred = apply(gt, 0.3, testing::rotation_from(rng), testing::random_vec(rng, 200));
  CHECK(p_mpjpe(pred, gt) < 1e-9);
}

TEST_CASE("p_mpjpe never exceeds mpjpe") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = random_pose(rng), b = random_pose(rng);
    CHECK(p_mpjpe(a, b) <= mpjpe(a, b) + 1e-9);
  }
}

TEST_CASE("closed form beats random similarity transforms") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 10.0);
  std::uniform_real_distribution<double> log_s(std::log(0.5), std::log(2.0));
  const auto gt = random_pose(rng);
  std::vector<Vec3> pred;
  for (const auto& p : gt) pred.push_back(p + Vec3(noise(rng), noise(rng), noise(rng)));
  const double pm = p_mpjpe(pred, gt);
  CHECK(pm > 0.0);
  CHECK(pm < mpjpe(pred, gt));

  // Procrustes minimises squared error; compare the same objective.
  const auto sim = procrustes_align(pred, gt);
  auto sq_err = [&](double s, const Mat3& r, const Vec3& t) {
    double e = 0;
    for (std::size_t j = 0; j < gt.size(); ++j) e += (s * (r * pred[j]) + t - gt[j]).squaredNorm();
    return e;
  };
  const double best = sq_err(sim.scale, sim.rotation, sim.translation);
  for (int trial = 0; trial < 10000; ++trial) {
    const Mat3 r = Eigen::AngleAxisd(0.1 * (trial % 7), testing::random_vec(rng, 1).normalized())
                       .toRotationMatrix() *
                   sim.rotation;
    const double s = sim.scale * std::exp(0.1 * log_s(rng));
    const Vec3 t = sim.translation + testing::random_vec(rng, 5.0);
    CHECK(sq_err(s, r, t) >= best);
  }
}

TEST_CASE("p_mpjpe is invariant to similarity transforms of pred") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> log_s(std::log(0.1), std::log(10.0));
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_pose(rng), b = random_pose(rng);
    const auto moved =
        apply(a, std::exp(log_s(rng)), testing::rotation_from(rng), testing::random_vec(rng, 1000));
    CHECK(std::abs(p_mpjpe(moved, b) - p_mpjpe(a, b)) < 1e-9);
  }
}

TEST_CASE("sequence evaluation pairs frames by index") {
  std::mt19937_64 rng(9);
  PoseSequence gt, pred;
  for (std::size_t f = 0; f < 5; ++f) {
    gt.frames.push_back({random_pose(rng), f * 2});
  }
  pred.frames = {gt.frames[3], gt.frames[1]};
  for (auto& p : pred.frames[0].coords) p += Vec3(0, 0, 4);
  const auto report = evaluate_sequences(pred, gt);
  REQUIRE(report.per_frame.size() == 2);
  CHECK(report.per_frame[0].frame_index == 6);
  CHECK(report.per_frame[0].mpjpe == 4.0);
  CHECK(report.per_frame[1].mpjpe == 0.0);
  CHECK(report.mpjpe == 2.0);
  CHECK(report.units == "mm");

  pred.frames[1].frame_index = 99;
  CHECK_THROWS_AS(evaluate_sequences(pred, gt), Error);
  pred.units = "universal";
  CHECK_THROWS_AS(evaluate_sequences(pred, gt), Error);
}

TEST_CASE("metric errors") {
  std::mt19937_64 rng(10);
  const auto a = random_pose(rng);
  std::vector<Vec3> short_pose(a.begin(), a.begin() + 5);
  CHECK_THROWS_AS(mpjpe(short_pose, a), Error);
  const std::vector<Vec3> point(17, Vec3(1, 1, 1));
  CHECK_THROWS_AS(p_mpjpe(point, a), Error);
}
