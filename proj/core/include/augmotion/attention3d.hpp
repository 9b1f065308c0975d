#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace augmotion {

using GridPos = std::array<std::size_t, 3>;  // (t, h, w)

/// Tokens laid out on an n_t x n_h x n_w grid, row-major: t, then h, then w.
class TokenGrid {
 public:
  TokenGrid(std::size_t n_t, std::size_t n_h, std::size_t n_w);

  const GridPos& extents() const noexcept { return extents_; }
  std::size_t size() const noexcept { return extents_[0] * extents_[1] * extents_[2]; }
  GridPos position(std::size_t token) const;
  std::size_t token(const GridPos& pos) const;

 private:
  GridPos extents_;
};

/// Learnable-in-principle bias per relative offset (dt, dh, dw), each offset
/// component ranging over [-(n-1), n-1].
class RelativeBiasTable {
 public:
  explicit RelativeBiasTable(const GridPos& extents);
  RelativeBiasTable(const GridPos& extents, std::vector<double> values);

  /// Table filled with U(-scale, scale) draws from a fixed-seed generator.
  static RelativeBiasTable random(const GridPos& extents, std::uint64_t seed, double scale = 1.0);

  const GridPos& extents() const noexcept { return extents_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t index) const { return values_.at(index); }
  double& operator[](std::size_t index) { return values_.at(index); }
  const std::vector<double>& values() const noexcept { return values_; }

  static std::size_t table_size(const GridPos& extents);

 private:
  GridPos extents_;
  std::vector<double> values_;
};

/// Table slot of the offset pos_i - pos_j: each component shifted by n - 1,
/// then mixed-radix flattened with radices (2 n_t - 1, 2 n_h - 1, 2 n_w - 1).
std::size_t relative_index(const GridPos& pos_i, const GridPos& pos_j, const GridPos& extents);

/// B[i][j] = table[relative_index(pos_i, pos_j)].
Eigen::MatrixXd bias_matrix(const TokenGrid& grid, const RelativeBiasTable& table);

/// Row-wise softmax(Q K^T / sqrt(d) + B), stabilised by subtracting each row's max.
Eigen::MatrixXd attention_weights(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                  const Eigen::MatrixXd& bias);

/// attention_weights(q, k, bias) * v
Eigen::MatrixXd attention_forward(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                  const Eigen::MatrixXd& v, const Eigen::MatrixXd& bias);

/// Row softmax of an arbitrary logit matrix.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

}  // namespace augmotion
