#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "aquagauge/gbm.hpp"
#include "aquagauge/model_io.hpp"
#include "aquagauge/split_kernels.hpp"
#include "fixtures.hpp"
#include "reference_gbm.hpp"

using namespace aquagauge::gbm;
using aquagauge::Execution;
using aquagauge::testing::Rng;
namespace ref = aquagauge::reference;

namespace {

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

// Small instance whose values are drawn from a coarse grid so duplicate
// feature values and tied gains show up regularly.
struct Small {
  FeatureMatrix x;
  std::vector<double> y;
};

Small small_instance(Rng& rng, std::size_t n, std::size_t cols) {
  const bool coarse = rng.integer(0, 1) == 1;
  std::vector<double> v(n * cols);
  for (double& d : v) d = coarse ? rng.integer(0, 4) : rng.uniform(-5, 5);
  std::vector<double> y(n);
  for (double& d : y) d = coarse ? rng.integer(0, 3) : rng.normal();
  return {FeatureMatrix(n, cols, std::move(v)), std::move(y)};
}

double r2(std::span<const double> y, std::span<const double> f) {
  double m = 0.0;
  for (double d : y) m += d;
  m /= static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - f[i]) * (y[i] - f[i]);
    ss_tot += (y[i] - m) * (y[i] - m);
  }
  return 1.0 - ss_res / ss_tot;
}

void expect_same_tree(const RegressionTree& tree, const std::vector<ref::Node>& expected) {
  ASSERT_EQ(tree.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& a = tree.nodes()[i];
    const auto& b = expected[i];
    EXPECT_EQ(a.is_leaf, b.leaf) << i;
    EXPECT_EQ(a.train_count, b.count) << i;
    if (b.leaf) {
      EXPECT_EQ(a.value, b.value) << i;
    } else {
      EXPECT_EQ(a.feature, b.feature) << i;
      EXPECT_EQ(a.threshold, b.threshold) << i;
      EXPECT_EQ(a.left, b.left) << i;
      EXPECT_EQ(a.right, b.right) << i;
    }
  }
}

}  // namespace

TEST(InitConstant, Examples) {
  EXPECT_EQ(init_constant(std::vector<double>{1, 2, 3}), 2.0);
  EXPECT_EQ(init_constant(std::vector<double>{5}), 5.0);
  EXPECT_EQ(init_constant(std::vector<double>{-1, 1}), 0.0);
  try {
    init_constant(std::vector<double>{});
    FAIL();
  } catch (const GbmError& e) {
    EXPECT_EQ(e.kind(), GbmErrorKind::empty_targets);
  }
}

TEST(NegativeGradient, Examples) {
  EXPECT_EQ(negative_gradient(std::vector<double>{3, 3}, std::vector<double>{1, 5}), (std::vector<double>{2, -2}));
  EXPECT_EQ(negative_gradient(std::vector<double>{4, -1}, std::vector<double>{4, -1}), (std::vector<double>{0, 0}));
  EXPECT_EQ(negative_gradient(std::vector<double>{10}, std::vector<double>{7.5}), (std::vector<double>{2.5}));
  try {
    negative_gradient(std::vector<double>{1, 2}, std::vector<double>{1});
    FAIL();
  } catch (const GbmError& e) {
    EXPECT_EQ(e.kind(), GbmErrorKind::length_mismatch);
  }
}

TEST(NegativeGradient, MatchesCentralDifferences) {
  Rng rng(31);
  const double eps = 1e-4;
  for (int i = 0; i < 1000; ++i) {
    const double y = rng.uniform(-100, 100);
    const double f = rng.uniform(-100, 100);
    const double fd = (squared_loss(y, f + eps) - squared_loss(y, f - eps)) / (-2.0 * eps);
    const double g = negative_gradient(std::vector<double>{y}, std::vector<double>{f})[0];
    EXPECT_NEAR(g, fd, 1e-6);
  }
}

TEST(LineSearchLeaf, Examples) {
  EXPECT_EQ(line_search_leaf(std::vector<double>{2, 4}), 3.0);
  EXPECT_EQ(line_search_leaf(std::vector<double>{0, 0, 0}), 0.0);
  EXPECT_EQ(line_search_leaf(std::vector<double>{-6}), -6.0);
  try {
    line_search_leaf(std::vector<double>{});
    FAIL();
  } catch (const GbmError& e) {
    EXPECT_EQ(e.kind(), GbmErrorKind::empty_leaf);
  }
}

TEST(BestSplit, TwoPointsAreForced) {
  const FeatureMatrix x(2, 1, {0.0, 1.0});
  const std::vector<double> y{0.0, 1.0};
  const auto s = best_split(x, all_rows(2), y, 1);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->feature, 0);
  EXPECT_EQ(s->threshold, 0.5);
  EXPECT_EQ(s->sse, 0.0);
  EXPECT_EQ(s->left_count, 1u);
}

TEST(BestSplit, EqualTargetsGiveNone) {
  const FeatureMatrix x(4, 2, {0, 1, 1, 2, 2, 3, 3, 4});
  EXPECT_FALSE(best_split(x, all_rows(4), std::vector<double>(4, 0.1), 1));
  EXPECT_FALSE(best_split(x, all_rows(4), std::vector<double>(4, 7.0), 1));
}

TEST(BestSplit, MinLeafMakesSplitInfeasible) {
  const FeatureMatrix x(3, 1, {0, 1, 2});
  EXPECT_FALSE(best_split(x, all_rows(3), std::vector<double>{0, 1, 2}, 2));
}

TEST(BestSplit, ConstantFeatureGivesNone) {
  const FeatureMatrix x(3, 1, {5, 5, 5});
  EXPECT_FALSE(best_split(x, all_rows(3), std::vector<double>{0, 1, 2}, 1));
}

TEST(BestSplit, TieGoesToLowerFeatureThenLowerThreshold) {
  // Both features order the rows identically.
  const FeatureMatrix x(4, 2, {0, 10, 1, 11, 2, 12, 3, 13});
  const auto s = best_split(x, all_rows(4), std::vector<double>{0, 0, 1, 1}, 1);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->feature, 0);
  EXPECT_EQ(s->threshold, 1.5);
  // Symmetric target: cutting after row 1 or row 3 is equally good.
  const FeatureMatrix z(4, 1, {0, 1, 2, 3});
  const auto t = best_split(z, all_rows(4), std::vector<double>{1, 0, 0, 1}, 1);
  ASSERT_TRUE(t);
  EXPECT_EQ(t->threshold, 0.5);
}

TEST(BestSplit, MatchesBruteForceOnSmallInstances) {
  Rng rng(32);
  for (int trial = 0; trial < 500; ++trial) {
    const auto inst = small_instance(rng, static_cast<std::size_t>(rng.integer(1, 12)), 2);
    const int min_leaf = rng.integer(1, 3);
    const auto rows = all_rows(inst.y.size());
    const auto got = best_split(inst.x, rows, inst.y, min_leaf);
    const auto want = ref::brute_best_split(inst.x, rows, inst.y, min_leaf);
    ASSERT_EQ(got.has_value(), want.has_value()) << trial;
    if (!want) continue;
    EXPECT_EQ(got->feature, want->feature) << trial;
    EXPECT_EQ(got->threshold, want->threshold) << trial;
    EXPECT_EQ(got->sse, want->sse) << trial;
  }
}

TEST(BestSplit, SubsetOfRows) {
  Rng rng(33);
  const auto inst = small_instance(rng, 40, 3);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < 40; i += 3) rows.push_back(i);
  const auto got = best_split(inst.x, rows, inst.y, 2);
  const auto want = ref::brute_best_split(inst.x, rows, inst.y, 2);
  ASSERT_EQ(got.has_value(), want.has_value());
  if (want) {
    EXPECT_EQ(got->feature, want->feature);
    EXPECT_EQ(got->threshold, want->threshold);
  }
}

TEST(SplitKernels, SerialMatchesParallel) {
  Rng rng(34);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = small_instance(rng, 300, 6);
    const auto rows = all_rows(300);
    EXPECT_EQ(kernels::best_split_serial(inst.x, rows, inst.y, 5),
              kernels::best_split_parallel(inst.x, rows, inst.y, 5));
  }
  const auto task = aquagauge::testing::additive_task(400, 3);
  Hyperparams hp;
  hp.n_trees = 20;
  hp.min_samples_split = 20;
  hp.min_samples_leaf = 5;
  hp.max_depth = 4;
  const auto a = gbm_fit(task.x, task.y, hp, Execution::serial);
  const auto b = gbm_fit(task.x, task.y, hp, Execution::parallel);
  EXPECT_EQ(serialize_model(a), serialize_model(b));
  EXPECT_EQ(gbm_predict_batch(a, task.x, Execution::serial), gbm_predict_batch(a, task.x, Execution::parallel));
}

TEST(FitTree, DepthZeroIsMeanLeaf) {
  Rng rng(35);
  const auto inst = small_instance(rng, 10, 2);
  Hyperparams hp;
  hp.max_depth = 0;
  hp.min_samples_split = 2;
  hp.min_samples_leaf = 1;
  const auto tree = fit_tree(inst.x, inst.y, hp);
  ASSERT_EQ(tree.size(), 1u);
  EXPECT_EQ(tree.nodes()[0].value, line_search_leaf(inst.y));
}

TEST(FitTree, EqualResidualsGiveSingleLeaf) {
  Rng rng(36);
  const auto inst = small_instance(rng, 30, 3);
  Hyperparams hp;
  hp.min_samples_split = 2;
  hp.min_samples_leaf = 1;
  const auto tree = fit_tree(inst.x, std::vector<double>(30, 0.7), hp);
  ASSERT_EQ(tree.size(), 1u);
  EXPECT_DOUBLE_EQ(tree.nodes()[0].value, 0.7);
}

TEST(FitTree, MatchesNaiveGreedyReference) {
  Rng rng(37);
  for (int trial = 0; trial < 200; ++trial) {
    const bool tiny = trial % 2 == 0;
    const auto inst = small_instance(rng, static_cast<std::size_t>(tiny ? rng.integer(1, 12) : 20), 2);
    Hyperparams hp;
    hp.max_depth = rng.integer(0, 2);
    hp.min_samples_split = rng.integer(2, 4);
    hp.min_samples_leaf = tiny ? rng.integer(1, 2) : 2;
    SCOPED_TRACE(trial);
    expect_same_tree(fit_tree(inst.x, inst.y, hp), ref::greedy_tree(inst.x, inst.y, hp));
  }
}

TEST(GbmFit, ConstantTargets) {
  const auto task = aquagauge::testing::additive_task(50, 4);
  Hyperparams hp;
  hp.n_trees = 10;
  hp.min_samples_split = 2;
  hp.min_samples_leaf = 1;
  const auto model = gbm_fit(task.x, std::vector<double>(50, 3.25), hp);
  ASSERT_EQ(model.training_curve.size(), 11u);
  for (double l : model.training_curve) EXPECT_EQ(l, 0.0);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(gbm_predict(model, task.x.row(i)), 3.25);
}

TEST(GbmFit, SingleDepthZeroTreeIsMeanPredictor) {
  const auto task = aquagauge::testing::additive_task(80, 5);
  Hyperparams hp;
  hp.n_trees = 1;
  hp.max_depth = 0;
  const auto model = gbm_fit(task.x, task.y, hp);
  const double mean = init_constant(task.y);
  double var = 0.0;
  for (double y : task.y) var += (y - mean) * (y - mean);
  var /= static_cast<double>(task.y.size());
  EXPECT_NEAR(model.training_curve[1], var, 1e-12);
  for (std::size_t i = 0; i < 80; ++i) EXPECT_NEAR(gbm_predict(model, task.x.row(i)), mean, 1e-12);
}

TEST(GbmFit, SquareFunction) {
  std::vector<double> xs, ys;
  for (int i = 0; i < 200; ++i) {
    const double x = -3.0 + 6.0 * i / 199.0;
    xs.push_back(x);
    ys.push_back(x * x);
  }
  const FeatureMatrix x(200, 1, xs);
  Hyperparams hp;
  hp.n_trees = 100;
  hp.max_depth = 3;
  hp.min_samples_split = 10;
  hp.min_samples_leaf = 5;
  const auto model = gbm_fit(x, ys, hp);
  EXPECT_LT(model.training_curve[100], model.training_curve[1]);
  const auto pred = gbm_predict_batch(model, x);
  EXPECT_GT(r2(ys, pred), 0.95);
  const auto naive = ref::fit_gbm(x, ys, hp);
  for (std::size_t i = 0; i < 200; ++i) EXPECT_NEAR(pred[i], naive.train_predictions[i], 1e-9);
}

TEST(GbmFit, MatchesNaiveBoostingLoop) {
  const auto task = aquagauge::testing::additive_task(200, 6);
  Hyperparams hp;
  hp.n_trees = 30;
  hp.max_depth = 3;
  hp.min_samples_split = 20;
  hp.min_samples_leaf = 5;
  const auto model = gbm_fit(task.x, task.y, hp);
  const auto naive = ref::fit_gbm(task.x, task.y, hp);
  ASSERT_EQ(model.trees.size(), naive.trees.size());
  for (std::size_t t = 0; t < naive.trees.size(); ++t) expect_same_tree(model.trees[t], naive.trees[t]);
  for (std::size_t t = 0; t < naive.curve.size(); ++t) EXPECT_NEAR(model.training_curve[t], naive.curve[t], 1e-12);
}

TEST(GbmFit, StructuralInvariants) {
  const auto task = aquagauge::testing::additive_task(500, 7);
  for (int depth : {1, 3, 6}) {
    Hyperparams hp;
    hp.n_trees = 15;
    hp.max_depth = depth;
    hp.min_samples_split = 40;
    hp.min_samples_leaf = 12;
    const auto model = gbm_fit(task.x, task.y, hp);
    for (const auto& tree : model.trees) {
      EXPECT_FALSE(tree.structural_error(4));
      EXPECT_LE(tree.depth(), depth);
      for (const auto& n : tree.nodes()) {
        if (n.is_leaf) {
          EXPECT_GE(n.train_count, 12u);
        } else {
          EXPECT_GE(n.train_count, 40u);
          EXPECT_EQ(n.train_count, tree.nodes()[n.left].train_count + tree.nodes()[n.right].train_count);
        }
      }
      EXPECT_EQ(tree.nodes()[0].train_count, 500u);
    }
  }
}

TEST(GbmFit, TrainingCurveNonIncreasing) {
  const auto task = aquagauge::testing::additive_task(500, 8);
  Hyperparams hp;
  hp.n_trees = 100;
  hp.max_depth = 4;
  hp.min_samples_split = 20;
  hp.min_samples_leaf = 5;
  const auto model = gbm_fit(task.x, task.y, hp);
  for (std::size_t t = 0; t + 1 < model.training_curve.size(); ++t) {
    EXPECT_LE(model.training_curve[t + 1], model.training_curve[t] + 1e-12) << t;
  }
}

TEST(GbmFit, Deterministic) {
  const auto task = aquagauge::testing::additive_task(300, 9);
  Hyperparams hp;
  hp.n_trees = 25;
  hp.min_samples_split = 20;
  hp.min_samples_leaf = 5;
  hp.seed = 42;
  EXPECT_EQ(serialize_model(gbm_fit(task.x, task.y, hp)), serialize_model(gbm_fit(task.x, task.y, hp)));
}

TEST(GbmFit, ShrinkageIdentity) {
  const auto task = aquagauge::testing::additive_task(200, 10);
  Hyperparams hp;
  hp.n_trees = 1;
  hp.learning_rate = 1.0;
  hp.max_depth = 3;
  hp.min_samples_split = 10;
  hp.min_samples_leaf = 3;
  const auto model = gbm_fit(task.x, task.y, hp);
  const double f0 = init_constant(task.y);
  std::vector<double> residuals(task.y.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) residuals[i] = task.y[i] - f0;
  const auto raw = fit_tree(task.x, residuals, hp);
  for (std::size_t i = 0; i < task.y.size(); ++i) {
    EXPECT_EQ(gbm_predict(model, task.x.row(i)), f0 + raw.predict(task.x.row(i)));
  }
}

TEST(GbmFit, LeafValuesAreScaledByLearningRate) {
  const auto task = aquagauge::testing::additive_task(200, 11);
  Hyperparams hp;
  hp.n_trees = 1;
  hp.learning_rate = 0.25;
  hp.max_depth = 2;
  hp.min_samples_split = 10;
  hp.min_samples_leaf = 3;
  const auto model = gbm_fit(task.x, task.y, hp);
  std::vector<double> residuals(task.y.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) residuals[i] = task.y[i] - model.f0;
  const auto raw = fit_tree(task.x, residuals, hp);
  ASSERT_EQ(raw.size(), model.trees[0].size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw.nodes()[i].is_leaf) {
      EXPECT_EQ(model.trees[0].nodes()[i].value, raw.nodes()[i].value * 0.25);
    }
  }
}

TEST(GbmFit, RejectsBadInput) {
  const auto task = aquagauge::testing::additive_task(10, 12);
  auto kind = [](auto&& f) {
    try {
      f();
    } catch (const GbmError& e) {
      return e.kind();
    }
    ADD_FAILURE();
    return GbmErrorKind::empty_leaf;
  };
  EXPECT_EQ(kind([&] { gbm_fit(task.x, std::vector<double>(9, 0.0), Hyperparams{}); }), GbmErrorKind::length_mismatch);
  EXPECT_EQ(kind([&] { gbm_fit(FeatureMatrix(0, 4, {}), std::vector<double>{}, Hyperparams{}); }),
            GbmErrorKind::empty_targets);
  Hyperparams bad;
  bad.learning_rate = 0.0;
  EXPECT_EQ(kind([&] { gbm_fit(task.x, task.y, bad); }), GbmErrorKind::invalid_hyperparams);
  bad = Hyperparams{};
  bad.min_samples_leaf = 0;
  EXPECT_EQ(kind([&] { gbm_fit(task.x, task.y, bad); }), GbmErrorKind::invalid_hyperparams);
  EXPECT_EQ(kind([] { FeatureMatrix(1, 2, {1.0, NAN}); }), GbmErrorKind::non_finite);
  EXPECT_EQ(kind([] { FeatureMatrix(2, 2, {1.0}); }), GbmErrorKind::length_mismatch);
}

TEST(GbmPredict, ZeroTreesAndSingleLeaf) {
  GbmModel model;
  model.f0 = 1.5;
  model.n_features = 2;
  const std::vector<double> row{3.0, 4.0};
  EXPECT_EQ(gbm_predict(model, row), 1.5);
  model.trees.push_back(RegressionTree({TreeNode{true, -1, 0.0, -1, -1, 0.25, 1}}));
  EXPECT_EQ(gbm_predict(model, row), 1.75);
}

TEST(GbmPredict, EqualsSumOfTreesAndChecksRow) {
  const auto task = aquagauge::testing::additive_task(200, 13);
  Hyperparams hp;
  hp.n_trees = 20;
  hp.min_samples_split = 20;
  hp.min_samples_leaf = 5;
  const auto model = gbm_fit(task.x, task.y, hp);
  for (std::size_t i = 0; i < 200; ++i) {
    double acc = model.f0;
    for (const auto& t : model.trees) acc += t.predict(task.x.row(i));
    EXPECT_EQ(gbm_predict(model, task.x.row(i)), acc);
  }
  try {
    gbm_predict(model, std::vector<double>{1.0, 2.0});
    FAIL();
  } catch (const GbmError& e) {
    EXPECT_EQ(e.kind(), GbmErrorKind::arity_mismatch);
  }
  try {
    gbm_predict(model, std::vector<double>{1.0, 2.0, INFINITY, 0.0});
    FAIL();
  } catch (const GbmError& e) {
    EXPECT_EQ(e.kind(), GbmErrorKind::non_finite);
  }
}

TEST(RegressionTreeTest, StructuralErrorDetectsBadTrees) {
  EXPECT_TRUE(RegressionTree().structural_error(1));
  const RegressionTree cycle({TreeNode{false, 0, 0.5, 0, 0, 0.0, 2}});
  EXPECT_TRUE(cycle.structural_error(1));
  const RegressionTree bad_feature(
      {TreeNode{false, 3, 0.5, 1, 2, 0.0, 2}, TreeNode{true, -1, 0, -1, -1, 1.0, 1}, TreeNode{true, -1, 0, -1, -1, 2.0, 1}});
  EXPECT_TRUE(bad_feature.structural_error(2));
  EXPECT_FALSE(bad_feature.structural_error(4));
}
