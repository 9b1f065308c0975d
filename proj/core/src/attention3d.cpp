#include "augmotion/attention3d.hpp"

#include <cmath>
#include <random>

#include "augmotion/error.hpp"

namespace augmotion {

TokenGrid::TokenGrid(std::size_t n_t, std::size_t n_h, std::size_t n_w) : extents_{n_t, n_h, n_w} {
  if (n_t == 0 || n_h == 0 || n_w == 0)
    throw Error(ErrorKind::kInvalidArgument, "token grid extents must be positive");
}

GridPos TokenGrid::position(std::size_t token) const {
  if (token >= size()) throw Error(ErrorKind::kOutOfBounds, "token index outside the grid");
  const std::size_t w = token % extents_[2];
  const std::size_t h = (token / extents_[2]) % extents_[1];
  const std::size_t t = token / (extents_[2] * extents_[1]);
  return {t, h, w};
}

std::size_t TokenGrid::token(const GridPos& pos) const {
  for (std::size_t k = 0; k < 3; ++k)
    if (pos[k] >= extents_[k]) throw Error(ErrorKind::kOutOfBounds, "position outside the grid");
  return (pos[0] * extents_[1] + pos[1]) * extents_[2] + pos[2];
}

std::size_t RelativeBiasTable::table_size(const GridPos& extents) {
  return (2 * extents[0] - 1) * (2 * extents[1] - 1) * (2 * extents[2] - 1);
}

RelativeBiasTable::RelativeBiasTable(const GridPos& extents)
    : RelativeBiasTable(extents, std::vector<double>(table_size(extents), 0.0)) {}

RelativeBiasTable::RelativeBiasTable(const GridPos& extents, std::vector<double> values)
    : extents_(extents), values_(std::move(values)) {
  for (std::size_t e : extents_)
    if (e == 0) throw Error(ErrorKind::kInvalidArgument, "bias table extents must be positive");
  if (values_.size() != table_size(extents_))
    throw Error(ErrorKind::kShapeMismatch, "bias table needs " +
                                               std::to_string(table_size(extents_)) +
                                               " entries, got " + std::to_string(values_.size()));
}

RelativeBiasTable RelativeBiasTable::random(const GridPos& extents, std::uint64_t seed,
                                            double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  std::vector<double> values(table_size(extents));
  for (double& v : values) v = dist(rng);
  return RelativeBiasTable(extents, std::move(values));
}

std::size_t relative_index(const GridPos& pos_i, const GridPos& pos_j, const GridPos& extents) {
  std::size_t index = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    if (pos_i[k] >= extents[k] || pos_j[k] >= extents[k])
      throw Error(ErrorKind::kOutOfBounds, "position outside the token grid");
    // pos_i - pos_j + (n - 1), always in [0, 2n - 2]
    const std::size_t shifted = pos_i[k] + extents[k] - 1 - pos_j[k];
    index = index * (2 * extents[k] - 1) + shifted;
  }
  return index;
}

Eigen::MatrixXd bias_matrix(const TokenGrid& grid, const RelativeBiasTable& table) {
  if (table.extents() != grid.extents())
    throw Error(ErrorKind::kShapeMismatch, "bias table was sized for a different grid");
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const GridPos pi = grid.position(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < n; ++j)
      b(i, j) = table[relative_index(pi, grid.position(static_cast<std::size_t>(j)), grid.extents())];
  }
  return b;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  if (!logits.allFinite()) throw Error(ErrorKind::kNonFinite, "attention logits are not finite");
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

Eigen::MatrixXd attention_weights(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                  const Eigen::MatrixXd& bias) {
  if (q.cols() == 0) throw Error(ErrorKind::kShapeMismatch, "head dimension must be >= 1");
  if (q.rows() != k.rows() || q.cols() != k.cols())
    throw Error(ErrorKind::kShapeMismatch, "Q and K shapes differ");
  if (bias.rows() != q.rows() || bias.cols() != q.rows())
    throw Error(ErrorKind::kShapeMismatch, "bias must be n x n");
  if (!q.allFinite() || !k.allFinite() || !bias.allFinite())
    throw Error(ErrorKind::kNonFinite, "attention input is not finite");
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  return softmax_rows(q * k.transpose() * scale + bias);
}

Eigen::MatrixXd attention_forward(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                  const Eigen::MatrixXd& v, const Eigen::MatrixXd& bias) {
  if (v.rows() != q.rows())
    throw Error(ErrorKind::kShapeMismatch, "V must have one row per token");
  if (!v.allFinite()) throw Error(ErrorKind::kNonFinite, "attention input is not finite");
  return attention_weights(q, k, bias) * v;
}

}  // namespace augmotion
