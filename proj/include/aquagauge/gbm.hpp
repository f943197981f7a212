#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aquagauge/error.hpp"

namespace aquagauge::gbm {

enum class GbmErrorKind {
  empty_targets,
  length_mismatch,
  arity_mismatch,
  non_finite,
  empty_leaf,
  invalid_hyperparams,
};

class GbmError : public KindedError<GbmErrorKind> {
 public:
  using KindedError::KindedError;
};

// Defaults follow the published configuration: split 200, rate 0.1,
// depth 8, leaf 30. n_trees is not published; 100 is our choice.
struct Hyperparams {
  int n_trees = 100;
  double learning_rate = 0.1;
  int max_depth = 8;
  int min_samples_split = 200;
  int min_samples_leaf = 30;
  std::uint64_t seed = 0;

  // Throws GbmError(invalid_hyperparams).
  void validate() const;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

enum class Loss { squared_error };

// Dense row-major matrix of finite values.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<double> values,
                std::vector<std::string> feature_names = {});

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_cols() const noexcept { return n_cols_; }
  double at(std::size_t r, std::size_t c) const noexcept { return values_[r * n_cols_ + c]; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {values_.data() + r * n_cols_, n_cols_};
  }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }

  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<double> values_;
  std::vector<std::string> names_;
};

// Internal nodes route rows with x[feature] <= threshold to `left`.
// train_count is the number of training rows that reached the node.
struct TreeNode {
  bool is_leaf = true;
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  std::size_t train_count = 0;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  double predict(std::span<const double> row) const noexcept;
  // Index of the leaf `row` lands in.
  int leaf_index(std::span<const double> row) const noexcept;
  // Edges on the longest root-to-leaf path.
  int depth() const;
  void scale_leaves(double factor);

  // Checks the node array is a proper binary tree rooted at 0 whose feature
  // indices are < n_features. Returns an explanation on failure.
  std::optional<std::string> structural_error(std::size_t n_features) const;

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
};

// f0 plus the trees. Leaf values already include the line-search step and
// the learning rate. training_curve[0] is the MSE of the constant model,
// training_curve[t] the MSE after t trees.
struct GbmModel {
  double f0 = 0.0;
  std::vector<RegressionTree> trees;
  Hyperparams hyperparams;
  Loss loss = Loss::squared_error;
  std::vector<double> training_curve;
  std::vector<std::string> feature_names;
  std::size_t n_features = 0;
};

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double sse = 0.0;   // total squared error of the two children
  double gain = 0.0;  // parent SSE minus sse
  std::size_t left_count = 0;

  friend bool operator==(const SplitCandidate&, const SplitCandidate&) = default;
};

// ½(y − f)².
inline double squared_loss(double y, double f) { return 0.5 * (y - f) * (y - f); }

double init_constant(std::span<const double> targets);
std::vector<double> negative_gradient(std::span<const double> targets,
                                      std::span<const double> predictions);
double line_search_leaf(std::span<const double> residuals_in_leaf);

// Best two-way split of `rows` (indices into x) against targets[row]. Each
// side must keep at least min_samples_leaf rows. Returns nullopt when no
// split is feasible or none reduces the squared error.
std::optional<SplitCandidate> best_split(const FeatureMatrix& x, std::span<const std::size_t> rows,
                                         std::span<const double> targets, int min_samples_leaf,
                                         Execution exec = Execution::parallel);

// Greedy CART on all rows of x. Leaf values are the mean residual of the
// leaf, unscaled.
RegressionTree fit_tree(const FeatureMatrix& x, std::span<const double> residuals,
                        const Hyperparams& hp, Execution exec = Execution::parallel);

GbmModel gbm_fit(const FeatureMatrix& x, std::span<const double> y, const Hyperparams& hp,
                 Execution exec = Execution::parallel);

double gbm_predict(const GbmModel& model, std::span<const double> row);

std::vector<double> gbm_predict_batch(const GbmModel& model, const FeatureMatrix& x,
                                      Execution exec = Execution::parallel);

double mean_squared_error(std::span<const double> y, std::span<const double> f);

}  // namespace aquagauge::gbm
