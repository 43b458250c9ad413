#include <algorithm>
#include <cmath>
#include <numeric>

#include "wristlink/error.hpp"
#include "wristlink/learn.hpp"
#include "wristlink/rng.hpp"

namespace wristlink {

namespace {

double gini(std::span<const double> counts, double total) {
  if (total <= 0.0) return 0.0;
  double s = 0.0;
  for (double c : counts) s += (c / total) * (c / total);
  return 1.0 - s;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child impurity
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, int max_features, int min_leaf, std::uint64_t seed)
      : data_(data),
        n_classes_(data.classes.size()),
        max_features_(max_features),
        min_leaf_(static_cast<std::size_t>(min_leaf)),
        rng_(seed, 0x74ee) {}

  DecisionTree build(std::vector<int> rows) {
    grow(rows);
    return std::move(tree_);
  }

 private:
  int new_node() {
    tree_.feature.push_back(-1);
    tree_.threshold.push_back(0.0);
    tree_.left.push_back(-1);
    tree_.right.push_back(-1);
    tree_.value.emplace_back(n_classes_, 0.0);
    return static_cast<int>(tree_.feature.size()) - 1;
  }

  int grow(std::span<int> rows) {
    const int node = new_node();
    auto& counts = tree_.value[static_cast<std::size_t>(node)];
    for (int r : rows) counts[static_cast<std::size_t>(data_.y[static_cast<std::size_t>(r)])] += 1.0;
    const double total = static_cast<double>(rows.size());
    const double parent = gini(counts, total);
    if (parent <= 0.0 || rows.size() < 2 * min_leaf_) return node;

    const Split best = find_split(rows, parent);
    if (best.feature < 0) return node;

    const auto mid = std::partition(rows.begin(), rows.end(), [&](int r) {
      return data_.X(r, best.feature) <= best.threshold;
    });
    const auto n_left = static_cast<std::size_t>(mid - rows.begin());
    tree_.feature[static_cast<std::size_t>(node)] = best.feature;
    tree_.threshold[static_cast<std::size_t>(node)] = best.threshold;
    const int l = grow(rows.subspan(0, n_left));
    const int r = grow(rows.subspan(n_left));
    tree_.left[static_cast<std::size_t>(node)] = l;
    tree_.right[static_cast<std::size_t>(node)] = r;
    return node;
  }

  /// Visits features in a random order until max_features non-constant ones
  /// have been scored.
  Split find_split(std::span<const int> rows, double parent) {
    const auto d = static_cast<int>(data_.cols());
    std::vector<int> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    Split best;
    best.impurity = parent;
    int scored = 0;
    std::vector<std::pair<double, int>> column(rows.size());
    std::vector<double> left(n_classes_), right(n_classes_);
    for (int i = 0; i < d && scored < max_features_; ++i) {
      const auto j = static_cast<std::size_t>(i) + rng_.below(static_cast<std::uint64_t>(d - i));
      std::swap(order[static_cast<std::size_t>(i)], order[j]);
      const int f = order[static_cast<std::size_t>(i)];

      for (std::size_t k = 0; k < rows.size(); ++k) {
        column[k] = {data_.X(rows[k], f), data_.y[static_cast<std::size_t>(rows[k])]};
      }
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;
      ++scored;

      std::fill(left.begin(), left.end(), 0.0);
      std::fill(right.begin(), right.end(), 0.0);
      for (const auto& c : column) right[static_cast<std::size_t>(c.second)] += 1.0;
      const double n = static_cast<double>(rows.size());
      for (std::size_t k = 0; k + 1 < column.size(); ++k) {
        left[static_cast<std::size_t>(column[k].second)] += 1.0;
        right[static_cast<std::size_t>(column[k].second)] -= 1.0;
        if (column[k].first == column[k + 1].first) continue;
        const std::size_t nl = k + 1;
        const std::size_t nr = column.size() - nl;
        if (nl < min_leaf_ || nr < min_leaf_) continue;
        const double dl = static_cast<double>(nl), dr = static_cast<double>(nr);
        const double imp = (dl * gini(left, dl) + dr * gini(right, dr)) / n;
        if (imp < best.impurity - 1e-15) {
          best.feature = f;
          best.threshold = 0.5 * (column[k].first + column[k + 1].first);
          best.impurity = imp;
        }
      }
    }
    return best;
  }

  const Dataset& data_;
  std::size_t n_classes_;
  int max_features_;
  std::size_t min_leaf_;
  CounterRng rng_;
  DecisionTree tree_;
};

}  // namespace

int DecisionTree::leaf_for(std::span<const double> x) const {
  int node = 0;
  while (feature[static_cast<std::size_t>(node)] >= 0) {
    const auto i = static_cast<std::size_t>(node);
    node = x[static_cast<std::size_t>(feature[i])] <= threshold[i] ? left[i] : right[i];
  }
  return node;
}

ForestModel train_forest(const Dataset& train, const ForestConfig& config) {
  require(!train.classes.empty() && train.rows() > 0, Errc::DegenerateLabels,
          "random forest needs a non-empty label set and data");
  train.validate();
  require(config.n_trees >= 1 && config.min_leaf >= 1 && config.max_features >= 0,
          Errc::InvalidConfig, "invalid forest configuration");
  const auto d = static_cast<int>(train.cols());
  const int max_features = config.max_features > 0
                               ? std::min(config.max_features, d)
                               : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));

  ForestModel model;
  model.classes = train.classes;
  model.dimension = train.cols();
  const auto n = train.rows();
  for (int t = 0; t < config.n_trees; ++t) {
    const std::uint64_t tree_seed = derive_seed(config.seed, static_cast<std::uint64_t>(t));
    CounterRng boot(tree_seed, 0xb007);
    std::vector<int> rows(n);
    for (auto& r : rows) r = static_cast<int>(boot.below(n));
    TreeBuilder builder(train, max_features, config.min_leaf, tree_seed);
    model.trees.push_back(builder.build(std::move(rows)));
    model.tree_seeds.push_back(tree_seed);
  }
  return model;
}

Prediction predict(const ForestModel& model, std::span<const double> x) {
  require(x.size() == model.dimension, Errc::ShapeMismatch,
          "feature vector has " + std::to_string(x.size()) + " values, model expects " +
              std::to_string(model.dimension));
  require(!model.trees.empty(), Errc::InvalidConfig, "forest has no trees");
  Prediction p;
  p.probabilities.assign(model.classes.size(), 0.0);
  for (const auto& tree : model.trees) {
    const auto& counts = tree.value[static_cast<std::size_t>(tree.leaf_for(x))];
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    for (std::size_t c = 0; c < counts.size(); ++c) p.probabilities[c] += counts[c] / total;
  }
  const double sum = std::accumulate(p.probabilities.begin(), p.probabilities.end(), 0.0);
  for (auto& v : p.probabilities) v /= sum;
  p.label = static_cast<int>(std::max_element(p.probabilities.begin(), p.probabilities.end()) -
                             p.probabilities.begin());
  return p;
}

}  // namespace wristlink
