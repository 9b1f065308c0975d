#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "augmotion/attention3d.hpp"
#include "augmotion/error.hpp"

using namespace augmotion;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

/// Direct, unstabilised evaluation for moderate inputs.
Eigen::MatrixXd naive_attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                const Eigen::MatrixXd& v, const Eigen::MatrixXd& b) {
  const auto n = q.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, v.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> w(static_cast<std::size_t>(n));
    double sum = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      w[j] = std::exp(q.row(i).dot(k.row(j)) / std::sqrt(double(q.cols())) + b(i, j));
      sum += w[j];
    }
    for (Eigen::Index j = 0; j < n; ++j) out.row(i) += (w[j] / sum) * v.row(j);
  }
  return out;
}

}  // namespace

TEST_CASE("token grid is row major") {
  TokenGrid g(2, 3, 4);
  CHECK(g.size() == 24);
  CHECK(g.position(0) == GridPos{0, 0, 0});
  CHECK(g.position(1) == GridPos{0, 0, 1});
  CHECK(g.position(4) == GridPos{0, 1, 0});
  CHECK(g.position(12) == GridPos{1, 0, 0});
  for (std::size_t t = 0; t < g.size(); ++t) CHECK(g.token(g.position(t)) == t);
  CHECK_THROWS_AS(g.position(24), Error);
}

TEST_CASE("relative index") {
  const GridPos ext{3, 2, 4};
  const std::size_t zero = relative_index({1, 1, 2}, {1, 1, 2}, ext);
  // offset (0,0,0) shifted by (n-1) in each axis, radices (5,3,7)
  CHECK(zero == (2 * 3 + 1) * 7 + 3);
  for (std::size_t a = 0; a < 3; ++a) CHECK(relative_index({a, 0, 0}, {a, 0, 0}, ext) == zero);

  const GridPos line{1, 1, 2};
  std::set<std::size_t> seen = {relative_index({0, 0, 0}, {0, 0, 1}, line),
                                relative_index({0, 0, 0}, {0, 0, 0}, line),
                                relative_index({0, 0, 1}, {0, 0, 0}, line)};
  CHECK(seen == std::set<std::size_t>{0, 1, 2});
  CHECK(RelativeBiasTable::table_size(line) == 3);
  CHECK_THROWS_AS(relative_index({0, 0, 2}, {0, 0, 0}, line), Error);
}

TEST_CASE("2x2x2 grid covers 27 offsets") {
  TokenGrid g(2, 2, 2);
  std::set<std::size_t> seen;
  std::set<std::array<long, 3>> offsets;
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      const auto pi = g.position(i), pj = g.position(j);
      seen.insert(relative_index(pi, pj, g.extents()));
      offsets.insert({long(pi[0]) - long(pj[0]), long(pi[1]) - long(pj[1]), long(pi[2]) - long(pj[2])});
    }
  CHECK(seen.size() == 27);
  CHECK(offsets.size() == 27);
  CHECK(RelativeBiasTable::table_size(g.extents()) == 27);
}

TEST_CASE("negated offsets map to mirrored entries") {
  const GridPos ext{2, 3, 3};
  TokenGrid g(2, 3, 3);
  const std::size_t size = RelativeBiasTable::table_size(ext);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      CHECK(relative_index(g.position(i), g.position(j), ext) +
                relative_index(g.position(j), g.position(i), ext) ==
            size - 1);
}

TEST_CASE("bias matrix") {
  TokenGrid g(2, 2, 3);
  RelativeBiasTable zero(g.extents());
  CHECK(bias_matrix(g, zero).isZero(0.0));

  RelativeBiasTable indicator(g.extents());
  indicator[relative_index({0, 0, 0}, {0, 0, 0}, g.extents())] = 1.0;
  CHECK(bias_matrix(g, indicator) == Eigen::MatrixXd::Identity(12, 12));

  TokenGrid pair(2, 1, 1);
  const auto table = RelativeBiasTable::random(pair.extents(), 4);
  const auto b = bias_matrix(pair, table);
  CHECK(b(0, 0) == b(1, 1));
  CHECK(b(0, 1) != b(1, 0));

  const auto rt = RelativeBiasTable::random(g.extents(), 9);
  const auto big = bias_matrix(g, rt);
  std::set<double> distinct(big.data(), big.data() + big.size());
  CHECK(distinct.size() <= rt.size());
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j)
      CHECK(big(i, j) == rt[relative_index(g.position(i), g.position(j), g.extents())]);

  CHECK_THROWS_AS(bias_matrix(pair, rt), Error);
}

TEST_CASE("uniform attention averages V") {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd v = random_matrix(rng, 6, 3, 5.0);
  const Eigen::MatrixXd q = Eigen::MatrixXd::Zero(6, 4);
  const Eigen::MatrixXd k = random_matrix(rng, 6, 4, 1.0);
  const auto out = attention_forward(q, k, v, Eigen::MatrixXd::Zero(6, 6));
  const Eigen::RowVectorXd mean = v.colwise().mean();
  for (int i = 0; i < 6; ++i) CHECK((out.row(i) - mean).norm() < 1e-12);
}

TEST_CASE("saturating bias selects its column") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd q = random_matrix(rng, 5, 1, 1.0), k = random_matrix(rng, 5, 1, 1.0);
  const Eigen::MatrixXd v = random_matrix(rng, 5, 2, 1.0);
  const Eigen::MatrixXd b = 1e6 * Eigen::MatrixXd::Identity(5, 5);
  const auto out = attention_forward(q, k, v, b);
  for (int i = 0; i < 5; ++i) CHECK((out.row(i) - v.row(i)).norm() < 1e-6);
}

TEST_CASE("two token closed form") {
  Eigen::MatrixXd q(2, 1), v(2, 1);
  q << 1, 0;
  v << 2.5, -4.0;
  const auto out = attention_forward(q, q, v, Eigen::MatrixXd::Zero(2, 2));
  const double s = std::exp(1.0) / (std::exp(1.0) + 1.0);
  CHECK(std::abs(out(0, 0) - (s * 2.5 + (1 - s) * -4.0)) < 1e-12);
  CHECK(std::abs(out(1, 0) - (0.5 * 2.5 + 0.5 * -4.0)) < 1e-12);
}

TEST_CASE("matches the direct formula") {
  std::mt19937_64 rng(4);
  TokenGrid g(2, 2, 2);
  const auto b = bias_matrix(g, RelativeBiasTable::random(g.extents(), 5));
  const Eigen::MatrixXd q = random_matrix(rng, 8, 4, 1), k = random_matrix(rng, 8, 4, 1),
                        v = random_matrix(rng, 8, 3, 1);
  CHECK((attention_forward(q, k, v, b) - naive_attention(q, k, v, b)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rows sum to one across magnitudes") {
  std::mt19937_64 rng(5);
  for (double scale : {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3}) {
    const Eigen::MatrixXd q = random_matrix(rng, 16, 8, scale), k = random_matrix(rng, 16, 8, scale);
    const Eigen::MatrixXd b = random_matrix(rng, 16, 16, scale);
    const auto w = attention_weights(q, k, b);
    CHECK(w.allFinite());
    for (int i = 0; i < 16; ++i) CHECK(std::abs(w.row(i).sum() - 1.0) < 1e-9);
    CHECK(w.minCoeff() >= 0.0);
  }
}

TEST_CASE("row shift invariance") {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd q = random_matrix(rng, 7, 3, 1), k = random_matrix(rng, 7, 3, 1),
                        v = random_matrix(rng, 7, 2, 1), b = random_matrix(rng, 7, 7, 1);
  Eigen::MatrixXd shifted = b;
  shifted.row(3).array() += 123.25;
  const auto a = attention_forward(q, k, v, b), c = attention_forward(q, k, v, shifted);
  CHECK((a - c).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("permutation equivariance") {
  std::mt19937_64 rng(7);
  const int n = 9;
  const Eigen::MatrixXd q = random_matrix(rng, n, 4, 1), k = random_matrix(rng, n, 4, 1),
                        v = random_matrix(rng, n, 3, 1), b = random_matrix(rng, n, n, 1);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd pq(n, 4), pk(n, 4), pv(n, 3), pb(n, n);
  for (int i = 0; i < n; ++i) {
    pq.row(i) = q.row(perm[i]);
    pk.row(i) = k.row(perm[i]);
    pv.row(i) = v.row(perm[i]);
    for (int j = 0; j < n; ++j) pb(i, j) = b(perm[i], perm[j]);
  }
  const auto out = attention_forward(q, k, v, b), pout = attention_forward(pq, pk, pv, pb);
  for (int i = 0; i < n; ++i) CHECK((pout.row(i) - out.row(perm[i])).norm() < 1e-12);
}

TEST_CASE("derivative with respect to V") {
  std::mt19937_64 rng(8);
  const int n = 6, d = 3;
  const Eigen::MatrixXd q = random_matrix(rng, n, d, 1), k = random_matrix(rng, n, d, 1),
                        b = random_matrix(rng, n, n, 1);
  Eigen::MatrixXd v = random_matrix(rng, n, d, 1);
  const auto w = attention_weights(q, k, b);
  const double h = 1e-5;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < d; ++c) {
      Eigen::MatrixXd vp = v, vm = v;
      vp(r, c) += h;
      vm(r, c) -= h;
      const Eigen::MatrixXd fd =
          (attention_forward(q, k, vp, b) - attention_forward(q, k, vm, b)) / (2 * h);
      for (int i = 0; i < n; ++i)
        for (int cc = 0; cc < d; ++cc) {
          const double analytic = cc == c ? w(i, r) : 0.0;
          CHECK(std::abs(fd(i, cc) - analytic) <= 1e-6 * std::max(1.0, std::abs(analytic)));
        }
    }
}

TEST_CASE("attention errors") {
  const Eigen::MatrixXd q = Eigen::MatrixXd::Ones(3, 2);
  CHECK_THROWS_AS(attention_forward(q, Eigen::MatrixXd::Ones(4, 2), Eigen::MatrixXd::Ones(3, 1),
                                    Eigen::MatrixXd::Zero(3, 3)),
                  Error);
  CHECK_THROWS_AS(attention_forward(q, q, Eigen::MatrixXd::Ones(2, 1), Eigen::MatrixXd::Zero(3, 3)),
                  Error);
  Eigen::MatrixXd bad = q;
  bad(1, 1) = NAN;
  try {
    attention_forward(bad, q, q, Eigen::MatrixXd::Zero(3, 3));
    FAIL("non-finite input accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNonFinite);
  }
}
