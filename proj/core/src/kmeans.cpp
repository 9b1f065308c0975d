#include "augmotion/kmeans.hpp"

#include <limits>
#include <random>

#include "augmotion/error.hpp"

namespace augmotion {

namespace {

std::size_t nearest(const Eigen::MatrixXd& centroids, const Eigen::RowVectorXd& x, double* dist2) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    const double d = (centroids.row(c) - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(c);
    }
  }
  if (dist2) *dist2 = best_d;
  return best;
}

Eigen::MatrixXd seed_plus_plus(const Eigen::MatrixXd& points, std::size_t k, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(points.rows());
  Eigen::MatrixXd centroids(static_cast<Eigen::Index>(k), points.cols());
  std::vector<bool> chosen(n, false);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto first = static_cast<std::size_t>(unit(rng) * static_cast<double>(n));
  if (first >= n) first = n - 1;
  centroids.row(0) = points.row(static_cast<Eigen::Index>(first));
  chosen[first] = true;

  std::vector<double> d2(n);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = chosen[i] ? 0.0
                        : (centroids.topRows(static_cast<Eigen::Index>(c)).rowwise() -
                           points.row(static_cast<Eigen::Index>(i)))
                              .rowwise()
                              .squaredNorm()
                              .minCoeff();
      total += d2[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > target) break;
      }
    } else {
      // every remaining point coincides with a centre: take the lowest unused index
      for (std::size_t i = 0; i < n && pick == n; ++i)
        if (!chosen[i]) pick = i;
    }
    chosen[pick] = true;
    centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(pick));
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n == 0) throw Error(ErrorKind::kEmptyInput, "kmeans needs at least one point");
  if (k == 0) throw Error(ErrorKind::kInvalidArgument, "k must be positive");
  if (k > n)
    throw Error(ErrorKind::kInvalidArgument,
                "k = " + std::to_string(k) + " exceeds point count " + std::to_string(n));
  if (!points.allFinite()) throw Error(ErrorKind::kNonFinite, "kmeans input is not finite");

  std::mt19937_64 rng(seed);
  KMeansResult result;
  result.centroids = seed_plus_plus(points, k, rng);
  result.assignments.assign(n, k);  // k = "unassigned", forces a first pass

  std::vector<std::size_t> counts(k);
  std::vector<double> dist2(n);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c =
          nearest(result.centroids, points.row(static_cast<Eigen::Index>(i)), &dist2[i]);
      if (c != result.assignments[i]) {
        result.assignments[i] = c;
        changed = true;
      }
    }
    result.iterations = iter + 1;
    if (!changed) {
      result.converged = true;
      break;
    }

    std::fill(counts.begin(), counts.end(), 0);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), points.cols());
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(static_cast<Eigen::Index>(result.assignments[i])) +=
          points.row(static_cast<Eigen::Index>(i));
      ++counts[result.assignments[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        result.centroids.row(static_cast<Eigen::Index>(c)) =
            sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
        continue;
      }
      // reseed with the worst-fit point
      std::size_t far = n;
      double far_d = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[result.assignments[i]] <= 1) continue;
        const double d = (result.centroids.row(static_cast<Eigen::Index>(result.assignments[i])) -
                          points.row(static_cast<Eigen::Index>(i)))
                             .squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == n) continue;
      --counts[result.assignments[far]];
      result.assignments[far] = c;
      counts[c] = 1;
      result.centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(far));
    }
  }

  // Final centroids are the means of their members.
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), points.cols());
  std::fill(counts.begin(), counts.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    sums.row(static_cast<Eigen::Index>(result.assignments[i])) +=
        points.row(static_cast<Eigen::Index>(i));
    ++counts[result.assignments[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0)
      result.centroids.row(static_cast<Eigen::Index>(c)) =
          sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
  }
  result.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    result.inertia += (result.centroids.row(static_cast<Eigen::Index>(result.assignments[i])) -
                       points.row(static_cast<Eigen::Index>(i)))
                          .squaredNorm();
  return result;
}

KMeansResult kmeans(std::span<const double> values, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter) {
  Eigen::MatrixXd points(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) points(static_cast<Eigen::Index>(i), 0) = values[i];
  return kmeans(points, k, seed, max_iter);
}

}  // namespace augmotion
