#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace augmotion {

inline constexpr std::size_t kDefaultKMeansMaxIter = 100;

struct KMeansResult {
  std::vector<std::size_t> assignments;  // one cluster label per point
  Eigen::MatrixXd centroids;             // k x dim
  double inertia = 0.0;                  // sum of squared distances to assigned centroid
  std::size_t iterations = 0;
  bool converged = false;
};

/// Lloyd's algorithm with k-means++ seeding. Rows of `points` are samples.
/// Distance ties go to the lower centroid index; an emptied cluster is reseeded
/// with the point farthest from its centroid (lowest index on ties) unless every
/// point already sits on its centroid.
KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter = kDefaultKMeansMaxIter);

/// One-dimensional convenience overload.
KMeansResult kmeans(std::span<const double> values, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter = kDefaultKMeansMaxIter);

}  // namespace augmotion
