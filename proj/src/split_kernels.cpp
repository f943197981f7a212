#include "aquagauge/split_kernels.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace aquagauge::gbm::kernels {
namespace {

constexpr double kNoGain = -std::numeric_limits<double>::infinity();
constexpr double kRelativeTieTolerance = 1e-9;
constexpr double kScaleFloor = 1e-20;

struct NodeStats {
  std::size_t n = 0;
  double mean = 0.0;
  double parent_sse = 0.0;
  double sum_of_squares = 0.0;
  double centered_total = 0.0;
};

NodeStats node_stats(std::span<const std::size_t> rows, std::span<const double> targets) {
  NodeStats st;
  st.n = rows.size();
  double sum = 0.0;
  for (std::size_t r : rows) sum += targets[r];
  st.mean = sum / static_cast<double>(st.n);
  for (std::size_t r : rows) {
    const double d = targets[r] - st.mean;
    st.parent_sse += d * d;
    st.sum_of_squares += targets[r] * targets[r];
    st.centered_total += d;
  }
  return st;
}

// Sorted feature values of the node and the gain of cutting after each
// prefix: gains[k] belongs to the split with k rows on the left.
struct FeatureScan {
  std::vector<double> values;
  std::vector<double> gains;
  double best = kNoGain;
};

void scan_feature(const FeatureMatrix& x, std::span<const std::size_t> rows,
                  std::span<const double> targets, const NodeStats& st, std::size_t feature,
                  std::size_t min_leaf, FeatureScan& out) {
  const std::size_t n = rows.size();
  std::vector<std::pair<double, double>> pairs(n);
  for (std::size_t i = 0; i < n; ++i) {
    pairs[i] = {x.at(rows[i], feature), targets[rows[i]] - st.mean};
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  out.values.resize(n);
  out.gains.assign(n, kNoGain);
  out.best = kNoGain;
  for (std::size_t i = 0; i < n; ++i) out.values[i] = pairs[i].first;

  const double total = st.centered_total;
  const double parent_term = total * total / static_cast<double>(n);
  double left = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    left += pairs[k - 1].second;
    if (!(out.values[k - 1] < out.values[k])) continue;
    if (k < min_leaf || n - k < min_leaf) continue;
    const double right = total - left;
    const double gain = left * left / static_cast<double>(k) +
                        right * right / static_cast<double>(n - k) - parent_term;
    out.gains[k] = gain;
    out.best = std::max(out.best, gain);
  }
}

// Two-pass squared error of each side of the chosen cut, summed in row order.
double children_sse(const FeatureMatrix& x, std::span<const std::size_t> rows,
                    std::span<const double> targets, std::size_t feature, double threshold) {
  double sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (std::size_t r : rows) {
    const int side = x.at(r, feature) <= threshold ? 0 : 1;
    sum[side] += targets[r];
    ++count[side];
  }
  const double mean[2] = {sum[0] / static_cast<double>(count[0]), sum[1] / static_cast<double>(count[1])};
  double sse[2] = {0.0, 0.0};
  for (std::size_t r : rows) {
    const int side = x.at(r, feature) <= threshold ? 0 : 1;
    const double d = targets[r] - mean[side];
    sse[side] += d * d;
  }
  return sse[0] + sse[1];
}

double cut_point(double lo, double hi) {
  const double mid = std::midpoint(lo, hi);
  return mid < hi ? mid : lo;
}

std::optional<SplitCandidate> select_split(const std::vector<FeatureScan>& scans, const NodeStats& st,
                                           const FeatureMatrix& x, std::span<const std::size_t> rows,
                                           std::span<const double> targets) {
  double best = kNoGain;
  for (const auto& s : scans) best = std::max(best, s.best);
  const double tol = split_tolerance(st.parent_sse, st.sum_of_squares);
  if (!(best > tol)) return std::nullopt;

  const double cut = best - tol;
  for (std::size_t f = 0; f < scans.size(); ++f) {
    const auto& s = scans[f];
    if (s.best < cut) continue;
    for (std::size_t k = 1; k < s.gains.size(); ++k) {
      if (s.gains[k] >= cut) {
        SplitCandidate c;
        c.feature = static_cast<int>(f);
        c.threshold = cut_point(s.values[k - 1], s.values[k]);
        c.sse = children_sse(x, rows, targets, f, c.threshold);
        c.gain = st.parent_sse - c.sse;
        c.left_count = k;
        return c;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

double split_tolerance(double parent_sse, double sum_of_squares) {
  return kRelativeTieTolerance * parent_sse + kScaleFloor * sum_of_squares;
}

std::optional<SplitCandidate> best_split_serial(const FeatureMatrix& x,
                                                std::span<const std::size_t> rows,
                                                std::span<const double> targets,
                                                int min_samples_leaf) {
  if (rows.size() < 2) return std::nullopt;
  const NodeStats st = node_stats(rows, targets);
  std::vector<FeatureScan> scans(x.n_cols());
  for (std::size_t f = 0; f < x.n_cols(); ++f) {
    scan_feature(x, rows, targets, st, f, static_cast<std::size_t>(min_samples_leaf), scans[f]);
  }
  return select_split(scans, st, x, rows, targets);
}

std::optional<SplitCandidate> best_split_parallel(const FeatureMatrix& x,
                                                  std::span<const std::size_t> rows,
                                                  std::span<const double> targets,
                                                  int min_samples_leaf) {
  if (rows.size() < 2) return std::nullopt;
  const NodeStats st = node_stats(rows, targets);
  std::vector<FeatureScan> scans(x.n_cols());
  const auto n_features = static_cast<std::ptrdiff_t>(x.n_cols());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t f = 0; f < n_features; ++f) {
    scan_feature(x, rows, targets, st, static_cast<std::size_t>(f),
                 static_cast<std::size_t>(min_samples_leaf), scans[f]);
  }
  return select_split(scans, st, x, rows, targets);
}

void predict_batch_serial(const GbmModel& model, const FeatureMatrix& x, std::span<double> out) {
  for (std::size_t i = 0; i < x.n_rows(); ++i) {
    double acc = model.f0;
    for (const auto& tree : model.trees) acc += tree.predict(x.row(i));
    out[i] = acc;
  }
}

void predict_batch_parallel(const GbmModel& model, const FeatureMatrix& x, std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(x.n_rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = model.f0;
    for (const auto& tree : model.trees) acc += tree.predict(x.row(static_cast<std::size_t>(i)));
    out[i] = acc;
  }
}

void add_tree_serial(const RegressionTree& tree, const FeatureMatrix& x, std::span<double> preds) {
  for (std::size_t i = 0; i < x.n_rows(); ++i) preds[i] += tree.predict(x.row(i));
}

void add_tree_parallel(const RegressionTree& tree, const FeatureMatrix& x, std::span<double> preds) {
  const auto n = static_cast<std::ptrdiff_t>(x.n_rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) preds[i] += tree.predict(x.row(static_cast<std::size_t>(i)));
}

}  // namespace aquagauge::gbm::kernels
