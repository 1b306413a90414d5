#include <algorithm>
#include <cmath>
#include <limits>

#include "model_fit.hpp"
#include "radloc/errors.hpp"

namespace radloc {

SplitCandidate best_split(const Matrix& features, std::span<const int> labels,
                          std::span<const int> rows, int n_classes) {
  SplitCandidate best;
  best.cost = std::numeric_limits<double>::infinity();
  const std::size_t n = rows.size();
  if (n < 2) return best;

  std::vector<int> total_counts(static_cast<std::size_t>(n_classes), 0);
  for (int r : rows) ++total_counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(r)])];

  std::vector<std::pair<double, int>> sorted(n);  // (value, label)
  std::vector<int> left_counts(static_cast<std::size_t>(n_classes));
  std::vector<int> right_counts(static_cast<std::size_t>(n_classes));

  const auto gini_of = [&](const std::vector<int>& counts, std::size_t count_n) {
    double acc = 0.0;
    for (int c : counts) {
      const double p = static_cast<double>(c) / static_cast<double>(count_n);
      acc += p * p;
    }
    return 1.0 - acc;
  };

  for (std::size_t f = 0; f < features.cols; ++f) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<std::size_t>(rows[i]);
      sorted[i] = {features.at(r, f), labels[r]};
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (sorted.front().first == sorted.back().first) continue;  // constant

    std::fill(left_counts.begin(), left_counts.end(), 0);
    right_counts = total_counts;
    std::size_t i = 0;
    while (i < n) {
      // Move the whole block of equal values to the left side.
      const double value = sorted[i].first;
      std::size_t j = i;
      while (j < n && sorted[j].first == value) {
        ++left_counts[static_cast<std::size_t>(sorted[j].second)];
        --right_counts[static_cast<std::size_t>(sorted[j].second)];
        ++j;
      }
      if (j == n) break;  // no distinct value to the right
      const double threshold = 0.5 * (value + sorted[j].first);
      const double wl = static_cast<double>(j) / static_cast<double>(n);
      const double wr = static_cast<double>(n - j) / static_cast<double>(n);
      const double cost =
          wl * gini_of(left_counts, j) + wr * gini_of(right_counts, n - j);
      if (cost < best.cost) {
        best.cost = cost;
        best.feature = static_cast<int>(f);
        best.threshold = threshold;
      }
      i = j;
    }
  }
  return best;
}

namespace detail {

namespace {

int majority_class(std::span<const int> counts) {
  int best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c)
    if (counts[c] > counts[static_cast<std::size_t>(best)])
      best = static_cast<int>(c);
  return best;
}

struct TreeBuilder {
  const Matrix& features;
  std::span<const int> labels;
  int n_classes;
  int max_depth;
  std::vector<DtreeNode> nodes;

  int build(std::vector<int>& rows, int depth) {
    std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
    for (int r : rows) ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(r)])];
    const int majority = majority_class(counts);

    const auto make_leaf = [&] {
      DtreeNode leaf;
      leaf.leaf_class = majority;
      nodes.push_back(leaf);
      return static_cast<int>(nodes.size()) - 1;
    };

    const double impurity = gini(counts);
    if (impurity == 0.0 || depth >= max_depth || rows.size() < 2)
      return make_leaf();

    const SplitCandidate split = best_split(features, labels, rows, n_classes);
    // Internal nodes must strictly decrease the weighted impurity.
    if (!split.valid() || split.cost >= impurity - 1e-12) return make_leaf();

    std::vector<int> left_rows;
    std::vector<int> right_rows;
    for (int r : rows) {
      const double v = features.at(static_cast<std::size_t>(r),
                                   static_cast<std::size_t>(split.feature));
      (v <= split.threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const auto id = static_cast<int>(nodes.size());
    DtreeNode node;
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.leaf_class = majority;  // kept for robustness; traversal ends at leaves
    nodes.push_back(node);
    const int left = build(left_rows, depth + 1);
    const int right = build(right_rows, depth + 1);
    nodes[static_cast<std::size_t>(id)].left = left;
    nodes[static_cast<std::size_t>(id)].right = right;
    return id;
  }
};

}  // namespace

DtreeParams fit_dtree(const ModelConfig& config, const LabeledMatrix& data) {
  TreeBuilder builder{data.features, data.labels, data.n_classes,
                      config.dtree_max_depth, {}};
  std::vector<int> rows(data.features.rows);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
  builder.build(rows, 0);
  DtreeParams params;
  params.nodes = std::move(builder.nodes);
  return params;
}

}  // namespace detail

}  // namespace radloc
