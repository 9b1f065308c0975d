#include "augmotion/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/LU>
#include <Eigen/Geometry>

#include "augmotion/attention3d.hpp"
#include "augmotion/kabsch.hpp"

namespace augmotion {

bool SelfTestReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const SelfTestCheck& c) { return c.passed; });
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

namespace {

SelfTestCheck at_most(std::string name, double measured, double tolerance, std::string detail = {}) {
  return {std::move(name), measured <= tolerance, measured, tolerance, std::move(detail)};
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, double scale,
                              std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * u(rng);
  return m;
}

}  // namespace

SelfTestReport run_attention_selftest(std::uint64_t seed) {
  SelfTestReport report{"attention3d", {}};
  std::mt19937_64 rng(seed);
  const TokenGrid grid(2, 2, 3);
  const auto n = static_cast<Eigen::Index>(grid.size());
  const Eigen::Index d = 4;

  {
    double worst = 0.0;
    for (double magnitude : {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3}) {
      const auto table = RelativeBiasTable::random(grid.extents(), rng(), magnitude);
      const Eigen::MatrixXd w = attention_weights(random_matrix(n, d, magnitude, rng),
                                                  random_matrix(n, d, magnitude, rng),
                                                  bias_matrix(grid, table));
      worst = std::max(worst, (w.rowwise().sum().array() - 1.0).abs().maxCoeff());
    }
    report.checks.push_back(at_most("softmax_rows_sum_to_one", worst, 1e-9));
  }

  {
    const GridPos ext{2, 2, 2};
    const TokenGrid g(2, 2, 2);
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j)
        seen.insert(relative_index(g.position(i), g.position(j), ext));
    const double expected = 27.0;
    report.checks.push_back({"offset_coverage_2x2x2", static_cast<double>(seen.size()) == expected,
                             static_cast<double>(seen.size()), expected, "distinct offsets"});
  }

  {
    Eigen::MatrixXd q(2, 1), k(2, 1), v(2, 1);
    q << 1, 0;
    k << 1, 0;
    v << 2.0, -3.0;
    const Eigen::MatrixXd out = attention_forward(q, k, v, Eigen::MatrixXd::Zero(2, 2));
    const double sigma = std::exp(1.0) / (std::exp(1.0) + 1.0);
    const double expected = sigma * 2.0 + (1.0 - sigma) * -3.0;
    report.checks.push_back(at_most("two_token_closed_form", std::abs(out(0, 0) - expected), 1e-12));
  }

  {
    const Eigen::MatrixXd q = random_matrix(n, d, 1.0, rng), k = random_matrix(n, d, 1.0, rng),
                          v = random_matrix(n, d, 1.0, rng);
    Eigen::MatrixXd b = bias_matrix(grid, RelativeBiasTable::random(grid.extents(), rng()));
    const Eigen::MatrixXd base = attention_forward(q, k, v, b);
    b.row(1).array() += 7.5;
    const Eigen::MatrixXd shifted = attention_forward(q, k, v, b);
    report.checks.push_back(
        at_most("row_shift_invariance", (base - shifted).cwiseAbs().maxCoeff(), 1e-9));
  }

  {
    const Eigen::MatrixXd q = random_matrix(n, d, 1.0, rng), k = random_matrix(n, d, 1.0, rng),
                          v = random_matrix(n, d, 1.0, rng);
    const Eigen::MatrixXd b = bias_matrix(grid, RelativeBiasTable::random(grid.extents(), rng()));
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::PermutationMatrix<Eigen::Dynamic> p(n);
    for (Eigen::Index i = 0; i < n; ++i) p.indices()[i] = perm[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd expected = p * attention_forward(q, k, v, b);
    const Eigen::MatrixXd got = attention_forward(p * q, p * k, p * v, p * b * p.transpose());
    report.checks.push_back(
        at_most("permutation_equivariance", (expected - got).cwiseAbs().maxCoeff(), 1e-12));
  }

  {
    const auto table = RelativeBiasTable::random(grid.extents(), rng());
    const Eigen::MatrixXd b = bias_matrix(grid, table);
    bool shared = true;
    for (Eigen::Index i = 0; i < n && shared; ++i)
      for (Eigen::Index j = 0; j < n && shared; ++j) {
        const auto idx = relative_index(grid.position(static_cast<std::size_t>(i)),
                                        grid.position(static_cast<std::size_t>(j)), grid.extents());
        shared = b(i, j) == table[idx];
      }
    std::set<double> distinct(b.data(), b.data() + b.size());
    report.checks.push_back({"bias_weight_sharing",
                             shared && distinct.size() <= table.size(),
                             static_cast<double>(distinct.size()),
                             static_cast<double>(table.size()), "distinct values vs table size"});
  }

  {
    const Eigen::MatrixXd q = random_matrix(n, d, 1.0, rng), k = random_matrix(n, d, 1.0, rng),
                          v = random_matrix(n, d, 1.0, rng);
    const Eigen::MatrixXd b = bias_matrix(grid, RelativeBiasTable::random(grid.extents(), rng()));
    const Eigen::MatrixXd w = attention_weights(q, k, b);
    const double h = 1e-5;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index c = 0; c < d; ++c) {
        Eigen::MatrixXd vp = v, vm = v;
        vp(j, c) += h;
        vm(j, c) -= h;
        const Eigen::MatrixXd diff =
            (attention_forward(q, k, vp, b) - attention_forward(q, k, vm, b)) / (2.0 * h);
        for (Eigen::Index i = 0; i < n; ++i) {
          const double analytic = w(i, j);
          worst = std::max(worst, std::abs(diff(i, c) - analytic) / std::max(std::abs(analytic), 1e-3));
        }
      }
    report.checks.push_back(at_most("finite_difference_dV", worst, 1e-6, "relative error"));
  }
  return report;
}

SelfTestReport run_kabsch_selftest(std::uint64_t seed, std::size_t trials) {
  SelfTestReport report{"kabsch", {}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_points = [&](std::size_t n, double scale) {
    std::vector<Vec3> pts(n);
    for (auto& p : pts) p = scale * Vec3(u(rng), u(rng), u(rng));
    return pts;
  };

  double worst_rot = 0.0, worst_rmsd = 0.0, worst_orth = 0.0, worst_det = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const auto a = random_points(17, 1.0);
    const Mat3 r0 = random_rotation(rng);
    const Vec3 t0 = random_points(1, 10.0)[0];
    std::vector<Vec3> b;
    for (const auto& p : a) b.push_back(r0 * p + t0);
    const auto t = kabsch(a, b);
    std::vector<Vec3> moved;
    for (const auto& p : a) moved.push_back(t.apply(p));
    worst_rot = std::max(worst_rot, (t.rotation - r0).norm());
    worst_rmsd = std::max(worst_rmsd, rmsd(moved, b));
    worst_orth = std::max(worst_orth, (t.rotation.transpose() * t.rotation - Mat3::Identity()).norm());
    worst_det = std::max(worst_det, std::abs(t.rotation.determinant() - 1.0));
  }
  report.checks.push_back(at_most("recover_rotation_frobenius", worst_rot, 1e-9));
  report.checks.push_back(at_most("recover_rmsd", worst_rmsd, 1e-9));
  report.checks.push_back(at_most("orthonormal", worst_orth, 1e-9));
  report.checks.push_back(at_most("det_plus_one", worst_det, 1e-9));

  {
    // Mirror image of an asymmetric tetrahedron: no proper rotation matches it.
    const std::vector<Vec3> a = {{0, 0, 0}, {3, 0, 0}, {0, 1.5, 0}, {0.4, 0.7, 2.2}};
    std::vector<Vec3> b;
    for (const auto& p : a) b.emplace_back(-p.x(), p.y(), p.z());
    const auto t = kabsch(a, b);
    std::vector<Vec3> moved;
    for (const auto& p : a) moved.push_back(t.apply(p));
    const double det = t.rotation.determinant();
    report.checks.push_back({"reflection_stays_proper", std::abs(det - 1.0) < 1e-9 && rmsd(moved, b) > 1e-3,
                             det, 1.0, "det(R) with RMSD > 0"});
  }

  {
    const auto a = random_points(17, 1.0);
    const Mat3 r0 = random_rotation(rng);
    std::vector<Vec3> b;
    for (const auto& p : a) b.push_back(r0 * p + 0.05 * Vec3(u(rng), u(rng), u(rng)));
    const auto t = kabsch(a, b);
    std::vector<Vec3> moved;
    for (const auto& p : a) moved.push_back(t.apply(p));
    const double best = rmsd(moved, b);
    double beaten_by = 0.0;
    for (int i = 0; i < 1000; ++i) {
      RigidTransform other{random_rotation(rng), Vec3::Zero()};
      Vec3 ca = Vec3::Zero(), cb = Vec3::Zero();
      for (std::size_t k = 0; k < a.size(); ++k) {
        ca += a[k];
        cb += b[k];
      }
      other.translation = (cb - other.rotation * ca) / static_cast<double>(a.size());
      std::vector<Vec3> m;
      for (const auto& p : a) m.push_back(other.apply(p));
      beaten_by = std::max(beaten_by, best - rmsd(m, b));
    }
    report.checks.push_back(at_most("monte_carlo_optimality", beaten_by, 1e-12,
                                    "largest RMSD improvement by a random rotation"));
  }
  return report;
}

}  // namespace augmotion
