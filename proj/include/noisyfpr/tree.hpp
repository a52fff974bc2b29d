#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace noisyfpr {

/// Node of a binary regression tree over encoded feature rows.
/// Internal nodes send x <= threshold left; missing values (NaN) follow
/// `missing_left`. Leaves carry an additive log-odds contribution.
struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  bool missing_left = false;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double evaluate(const double* row) const {
    std::int32_t i = 0;
    for (;;) {
      const TreeNode& n = nodes[static_cast<std::size_t>(i)];
      if (n.is_leaf()) return n.value;
      const double x = row[n.feature];
      const bool go_left = std::isnan(x) ? n.missing_left : x <= n.threshold;
      i = go_left ? n.left : n.right;
    }
  }

  bool operator==(const RegressionTree&) const = default;
};

}  // namespace noisyfpr
