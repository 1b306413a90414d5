#pragma once

#include <span>
#include <utility>
#include <vector>

#include "radloc/matrix.hpp"

namespace radloc {

/// Ball tree for exact nearest-neighbor search under the Minkowski metric.
/// Construction splits on the dimension of maximum spread at the median;
/// queries rank neighbors by (distance, index) so ties are deterministic and
/// results match a linear scan exactly.
class BallTree {
 public:
  BallTree() = default;
  BallTree(Matrix points, int leaf_size, double minkowski_p = 2.0);

  /// The k smallest (distance, point index) pairs, ascending.
  std::vector<std::pair<double, int>> query(std::span<const double> q,
                                            int k) const;

  const Matrix& points() const { return points_; }
  int leaf_size() const { return leaf_size_; }
  double minkowski_p() const { return p_; }

  double distance(std::span<const double> a, std::span<const double> b) const;

 private:
  struct Node {
    int begin = 0;
    int end = 0;  // index_ range [begin, end)
    int left = -1;
    int right = -1;
    double radius = 0.0;
    std::size_t centroid_row = 0;
  };

  int build(int begin, int end);

  Matrix points_;
  Matrix centroids_;
  std::vector<Node> nodes_;
  std::vector<int> index_;
  int leaf_size_ = 30;
  double p_ = 2.0;
};

}  // namespace radloc
