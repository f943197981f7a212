#pragma once

// Data-parallel kernels behind gbm_core. Each kernel has an OpenMP version
// and a serial reference; tests assert they agree bit for bit.

#include <optional>
#include <span>

#include "aquagauge/gbm.hpp"

namespace aquagauge::gbm::kernels {

// Gains within this distance of the best gain are treated as ties, and a
// best gain at or below it means "no useful split". Scales with the node's
// squared error and absorbs rounding noise when every target is equal.
double split_tolerance(double parent_sse, double sum_of_squares);

// Split search: features are scanned independently (in parallel for the
// OpenMP version), then the winner is the first (feature, threshold) in
// ascending order whose gain is within split_tolerance of the maximum.
std::optional<SplitCandidate> best_split_serial(const FeatureMatrix& x,
                                                std::span<const std::size_t> rows,
                                                std::span<const double> targets,
                                                int min_samples_leaf);
std::optional<SplitCandidate> best_split_parallel(const FeatureMatrix& x,
                                                  std::span<const std::size_t> rows,
                                                  std::span<const double> targets,
                                                  int min_samples_leaf);

// out[i] = f0 + sum of tree outputs for row i, trees added in order.
void predict_batch_serial(const GbmModel& model, const FeatureMatrix& x, std::span<double> out);
void predict_batch_parallel(const GbmModel& model, const FeatureMatrix& x, std::span<double> out);

// preds[i] += tree(row i).
void add_tree_serial(const RegressionTree& tree, const FeatureMatrix& x, std::span<double> preds);
void add_tree_parallel(const RegressionTree& tree, const FeatureMatrix& x, std::span<double> preds);

}  // namespace aquagauge::gbm::kernels
