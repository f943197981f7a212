#include "aquagauge/gbm.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "aquagauge/split_kernels.hpp"

namespace aquagauge::gbm {
namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (double d : v) {
    if (!std::isfinite(d)) throw GbmError(GbmErrorKind::non_finite, std::string(what) + " contains a non-finite value");
  }
}

double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (double d : v) sum += d;
  return sum / static_cast<double>(v.size());
}

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, std::span<const double> residuals, const Hyperparams& hp,
              Execution exec)
      : x_(x), residuals_(residuals), hp_(hp), exec_(exec) {}

  std::vector<TreeNode> build() {
    std::vector<std::size_t> rows(x_.n_rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    grow(std::move(rows), 0);
    return std::move(nodes_);
  }

 private:
  int grow(std::vector<std::size_t> rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[id].train_count = rows.size();

    std::optional<SplitCandidate> split;
    if (depth < hp_.max_depth && rows.size() >= static_cast<std::size_t>(hp_.min_samples_split)) {
      split = best_split(x_, rows, residuals_, hp_.min_samples_leaf, exec_);
    }
    if (!split) {
      std::vector<double> in_leaf;
      in_leaf.reserve(rows.size());
      for (std::size_t r : rows) in_leaf.push_back(residuals_[r]);
      nodes_[id].value = line_search_leaf(in_leaf);
      return id;
    }

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      (x_.at(r, static_cast<std::size_t>(split->feature)) <= split->threshold ? left : right).push_back(r);
    }
    if (left.size() != split->left_count) {
      throw InvariantViolation("split partition does not match the scanned left count");
    }
    rows.clear();
    rows.shrink_to_fit();

    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    TreeNode& node = nodes_[id];
    node.is_leaf = false;
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const FeatureMatrix& x_;
  std::span<const double> residuals_;
  const Hyperparams& hp_;
  Execution exec_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

void Hyperparams::validate() const {
  auto fail = [](const std::string& msg) { throw GbmError(GbmErrorKind::invalid_hyperparams, msg); };
  if (n_trees < 0) fail("n_trees must be >= 0");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) fail("learning_rate must be in (0, 1]");
  if (max_depth < 0) fail("max_depth must be >= 0");
  if (min_samples_split < 2) fail("min_samples_split must be >= 2");
  if (min_samples_leaf < 1) fail("min_samples_leaf must be >= 1");
}

FeatureMatrix::FeatureMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<double> values,
                             std::vector<std::string> feature_names)
    : n_rows_(n_rows), n_cols_(n_cols), values_(std::move(values)), names_(std::move(feature_names)) {
  if (values_.size() != n_rows_ * n_cols_) {
    throw GbmError(GbmErrorKind::length_mismatch, "feature matrix has " + std::to_string(values_.size()) +
                                                      " values, expected " + std::to_string(n_rows_ * n_cols_));
  }
  require_finite(values_, "feature matrix");
  if (names_.empty()) {
    for (std::size_t c = 0; c < n_cols_; ++c) names_.push_back("x" + std::to_string(c));
  } else if (names_.size() != n_cols_) {
    throw GbmError(GbmErrorKind::length_mismatch, "feature name count does not match column count");
  }
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
  std::vector<double> v;
  v.reserve(rows.size() * n_cols_);
  for (std::size_t r : rows) {
    auto src = row(r);
    v.insert(v.end(), src.begin(), src.end());
  }
  return FeatureMatrix(rows.size(), n_cols_, std::move(v), names_);
}

double RegressionTree::predict(std::span<const double> row) const noexcept {
  return nodes_[static_cast<std::size_t>(leaf_index(row))].value;
}

int RegressionTree::leaf_index(std::span<const double> row) const noexcept {
  int i = 0;
  while (!nodes_[i].is_leaf) {
    const TreeNode& n = nodes_[i];
    i = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return i;
}

int RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  int deepest = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes_[i].is_leaf) {
      stack.push_back({nodes_[i].left, d + 1});
      stack.push_back({nodes_[i].right, d + 1});
    }
  }
  return deepest;
}

void RegressionTree::scale_leaves(double factor) {
  for (auto& n : nodes_) {
    if (n.is_leaf) n.value *= factor;
  }
}

std::optional<std::string> RegressionTree::structural_error(std::size_t n_features) const {
  if (nodes_.empty()) return "tree has no nodes";
  const int size = static_cast<int>(nodes_.size());
  std::vector<int> parents(nodes_.size(), 0);
  for (int i = 0; i < size; ++i) {
    const TreeNode& n = nodes_[i];
    if (n.is_leaf) {
      if (!std::isfinite(n.value)) return "leaf " + std::to_string(i) + " has a non-finite value";
      continue;
    }
    if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= n_features) {
      return "node " + std::to_string(i) + " uses feature " + std::to_string(n.feature) + " out of range";
    }
    if (!std::isfinite(n.threshold)) return "node " + std::to_string(i) + " has a non-finite threshold";
    for (int child : {n.left, n.right}) {
      if (child <= 0 || child >= size || child == i) {
        return "node " + std::to_string(i) + " has invalid child " + std::to_string(child);
      }
      ++parents[child];
    }
  }
  for (int i = 1; i < size; ++i) {
    if (parents[i] != 1) {
      return "node " + std::to_string(i) + " has " + std::to_string(parents[i]) + " parents";
    }
  }
  // With one parent per non-root node, reaching every node from the root
  // rules out cycles.
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<int> stack{0};
  int visited = 0;
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    if (seen[i]) return "cycle through node " + std::to_string(i);
    seen[i] = true;
    ++visited;
    if (!nodes_[i].is_leaf) {
      stack.push_back(nodes_[i].left);
      stack.push_back(nodes_[i].right);
    }
  }
  if (visited != size) return "unreachable nodes";
  return std::nullopt;
}

double init_constant(std::span<const double> targets) {
  if (targets.empty()) throw GbmError(GbmErrorKind::empty_targets, "no targets");
  return mean_of(targets);
}

std::vector<double> negative_gradient(std::span<const double> targets, std::span<const double> predictions) {
  if (targets.size() != predictions.size()) {
    throw GbmError(GbmErrorKind::length_mismatch, "targets and predictions differ in length");
  }
  std::vector<double> g(targets.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = targets[i] - predictions[i];
  return g;
}

double line_search_leaf(std::span<const double> residuals_in_leaf) {
  if (residuals_in_leaf.empty()) throw GbmError(GbmErrorKind::empty_leaf, "leaf has no rows");
  return mean_of(residuals_in_leaf);
}

std::optional<SplitCandidate> best_split(const FeatureMatrix& x, std::span<const std::size_t> rows,
                                         std::span<const double> targets, int min_samples_leaf,
                                         Execution exec) {
  if (min_samples_leaf < 1) throw GbmError(GbmErrorKind::invalid_hyperparams, "min_samples_leaf must be >= 1");
  if (targets.size() < x.n_rows()) {
    throw GbmError(GbmErrorKind::length_mismatch, "targets must cover every matrix row");
  }
  return exec == Execution::parallel ? kernels::best_split_parallel(x, rows, targets, min_samples_leaf)
                                     : kernels::best_split_serial(x, rows, targets, min_samples_leaf);
}

RegressionTree fit_tree(const FeatureMatrix& x, std::span<const double> residuals, const Hyperparams& hp,
                        Execution exec) {
  hp.validate();
  if (x.n_rows() == 0) throw GbmError(GbmErrorKind::empty_targets, "no rows to fit");
  if (residuals.size() != x.n_rows()) {
    throw GbmError(GbmErrorKind::length_mismatch, "residuals do not match row count");
  }
  return RegressionTree(TreeBuilder(x, residuals, hp, exec).build());
}

double mean_squared_error(std::span<const double> y, std::span<const double> f) {
  if (y.size() != f.size()) throw GbmError(GbmErrorKind::length_mismatch, "length mismatch");
  if (y.empty()) throw GbmError(GbmErrorKind::empty_targets, "no values");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += (y[i] - f[i]) * (y[i] - f[i]);
  return sum / static_cast<double>(y.size());
}

GbmModel gbm_fit(const FeatureMatrix& x, std::span<const double> y, const Hyperparams& hp, Execution exec) {
  hp.validate();
  if (y.empty()) throw GbmError(GbmErrorKind::empty_targets, "no targets");
  if (x.n_rows() != y.size()) {
    throw GbmError(GbmErrorKind::length_mismatch, "feature rows and targets differ in length");
  }
  require_finite(y, "targets");

  GbmModel model;
  model.hyperparams = hp;
  model.feature_names = x.feature_names();
  model.n_features = x.n_cols();
  model.f0 = init_constant(y);

  std::vector<double> preds(y.size(), model.f0);
  model.training_curve.push_back(mean_squared_error(y, preds));

  for (int t = 0; t < hp.n_trees; ++t) {
    const std::vector<double> residuals = negative_gradient(y, preds);
    RegressionTree tree = fit_tree(x, residuals, hp, exec);
    tree.scale_leaves(hp.learning_rate);
    if (exec == Execution::parallel) {
      kernels::add_tree_parallel(tree, x, preds);
    } else {
      kernels::add_tree_serial(tree, x, preds);
    }
    model.trees.push_back(std::move(tree));
    model.training_curve.push_back(mean_squared_error(y, preds));
  }
  return model;
}

double gbm_predict(const GbmModel& model, std::span<const double> row) {
  if (row.size() != model.n_features) {
    throw GbmError(GbmErrorKind::arity_mismatch, "row has " + std::to_string(row.size()) +
                                                     " features, model expects " + std::to_string(model.n_features));
  }
  require_finite(row, "row");
  double acc = model.f0;
  for (const auto& tree : model.trees) acc += tree.predict(row);
  return acc;
}

std::vector<double> gbm_predict_batch(const GbmModel& model, const FeatureMatrix& x, Execution exec) {
  if (x.n_cols() != model.n_features) {
    throw GbmError(GbmErrorKind::arity_mismatch, "matrix has " + std::to_string(x.n_cols()) +
                                                     " features, model expects " + std::to_string(model.n_features));
  }
  std::vector<double> out(x.n_rows());
  if (exec == Execution::parallel) {
    kernels::predict_batch_parallel(model, x, out);
  } else {
    kernels::predict_batch_serial(model, x, out);
  }
  return out;
}

}  // namespace aquagauge::gbm
