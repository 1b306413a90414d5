#include "radloc/balltree.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "radloc/errors.hpp"

namespace radloc {

BallTree::BallTree(Matrix points, int leaf_size, double minkowski_p)
    : points_(std::move(points)), leaf_size_(leaf_size), p_(minkowski_p) {
  if (leaf_size_ < 1) throw UsageError("BallTree: leaf size < 1");
  if (p_ < 1.0) throw UsageError("BallTree: Minkowski p < 1");
  if (points_.rows == 0) return;
  index_.resize(points_.rows);
  for (std::size_t i = 0; i < points_.rows; ++i) index_[i] = static_cast<int>(i);
  nodes_.reserve(2 * points_.rows / std::max(1, leaf_size_ / 2) + 8);
  build(0, static_cast<int>(points_.rows));
}

double BallTree::distance(std::span<const double> a,
                          std::span<const double> b) const {
  if (p_ == 2.0) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double d = a[j] - b[j];
      acc += d * d;
    }
    return std::sqrt(acc);
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j)
    acc += std::pow(std::abs(a[j] - b[j]), p_);
  return std::pow(acc, 1.0 / p_);
}

int BallTree::build(int begin, int end) {
  const auto id = static_cast<int>(nodes_.size());
  Node node;
  node.begin = begin;
  node.end = end;
  node.centroid_row = nodes_.size();
  nodes_.push_back(node);

  const std::size_t cols = points_.cols;
  if (centroids_.cols == 0) centroids_ = Matrix(0, cols);
  centroids_.data.resize((nodes_.size()) * cols, 0.0);
  centroids_.rows = nodes_.size();
  const auto centroid = centroids_.row(static_cast<std::size_t>(id));
  for (int i = begin; i < end; ++i) {
    const auto pt = points_.row(static_cast<std::size_t>(index_[i]));
    for (std::size_t j = 0; j < cols; ++j) centroid[j] += pt[j];
  }
  for (std::size_t j = 0; j < cols; ++j) centroid[j] /= (end - begin);

  double radius = 0.0;
  for (int i = begin; i < end; ++i)
    radius = std::max(
        radius, distance(centroid, points_.row(static_cast<std::size_t>(index_[i]))));
  nodes_[static_cast<std::size_t>(id)].radius = radius;

  if (end - begin <= leaf_size_) return id;

  // Split on the dimension of maximum spread, at the median.
  std::size_t dim = 0;
  double best_spread = -1.0;
  for (std::size_t j = 0; j < cols; ++j) {
    double lo = points_.at(static_cast<std::size_t>(index_[begin]), j);
    double hi = lo;
    for (int i = begin + 1; i < end; ++i) {
      const double v = points_.at(static_cast<std::size_t>(index_[i]), j);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      dim = j;
    }
  }
  if (best_spread <= 0.0) return id;  // all points identical: leaf

  const int mid = begin + (end - begin) / 2;
  std::nth_element(index_.begin() + begin, index_.begin() + mid,
                   index_.begin() + end, [&](int a, int b) {
                     const double va = points_.at(static_cast<std::size_t>(a), dim);
                     const double vb = points_.at(static_cast<std::size_t>(b), dim);
                     return va != vb ? va < vb : a < b;
                   });

  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

std::vector<std::pair<double, int>> BallTree::query(std::span<const double> q,
                                                    int k) const {
  if (q.size() != points_.cols) throw SchemaError("BallTree: dimension mismatch");
  if (k < 1) throw UsageError("BallTree: k < 1");
  if (points_.rows == 0) return {};

  // Max-heap of the best (distance, index) pairs; lexicographic order makes
  // distance ties deterministic and identical to a linear scan.
  std::priority_queue<std::pair<double, int>> heap;
  const auto want = static_cast<std::size_t>(
      std::min<std::int64_t>(k, static_cast<std::int64_t>(points_.rows)));

  // A node whose lower bound exceeds the current k-th distance cannot
  // improve the result; the epsilon absorbs rounding in |q - c| - r.
  const auto prune = [&](double lower_bound) {
    return heap.size() == want &&
           lower_bound > heap.top().first * (1.0 + 1e-12) + 1e-300;
  };

  const auto visit = [&](const auto& self, int id) -> void {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    const double center_dist = distance(q, centroids_.row(node.centroid_row));
    if (prune(center_dist - node.radius)) return;

    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = index_[static_cast<std::size_t>(i)];
        const double d = distance(q, points_.row(static_cast<std::size_t>(idx)));
        const std::pair<double, int> cand{d, idx};
        if (heap.size() < want) {
          heap.push(cand);
        } else if (cand < heap.top()) {
          heap.pop();
          heap.push(cand);
        }
      }
      return;
    }

    const Node& left = nodes_[static_cast<std::size_t>(node.left)];
    const Node& right = nodes_[static_cast<std::size_t>(node.right)];
    const double dl = distance(q, centroids_.row(left.centroid_row));
    const double dr = distance(q, centroids_.row(right.centroid_row));
    const int first = dl <= dr ? node.left : node.right;
    const int second = dl <= dr ? node.right : node.left;
    self(self, first);
    self(self, second);
  };
  visit(visit, 0);

  std::vector<std::pair<double, int>> result;
  result.reserve(heap.size());
  while (!heap.empty()) {
    result.push_back(heap.top());
    heap.pop();
  }
  std::reverse(result.begin(), result.end());
  return result;
}

}  // namespace radloc
