#include "aquagauge/forecast.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include "aquagauge/csv.hpp"

namespace aquagauge::forecast {
namespace {

constexpr std::size_t kLags = 2;

// Positions (into ds.samples) of each station's observations, oldest first.
std::map<std::string, std::vector<std::size_t>> by_station(const ingest::Dataset& ds) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) groups[ds.samples[i].station_code].push_back(i);
  for (auto& [code, idx] : groups) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return ingest::month_index(ds.samples[a]) < ingest::month_index(ds.samples[b]);
    });
  }
  return groups;
}

// Position of the observation 4 months after `p` within `idx`, if any.
std::optional<std::size_t> horizon_partner(const ingest::Dataset& ds, const std::vector<std::size_t>& idx,
                                           std::size_t p) {
  const int t0 = ingest::month_index(ds.samples[idx[p]]);
  std::optional<std::size_t> best;
  int best_distance = kHorizonToleranceMonths + 1;
  for (std::size_t q = p + 1; q < idx.size(); ++q) {
    const int d = ingest::month_index(ds.samples[idx[q]]) - t0;
    if (d > kHorizonMonths + kHorizonToleranceMonths) break;
    const int distance = std::abs(d - kHorizonMonths);
    if (distance < best_distance) {
      best = q;
      best_distance = distance;
    }
  }
  return best;
}

SupervisedTask subset(const SupervisedTask& task, const std::vector<std::size_t>& rows) {
  SupervisedTask out{task.features.select_rows(rows), {}, {}};
  for (std::size_t r : rows) {
    out.targets.push_back(task.targets[r]);
    out.keys.push_back(task.keys[r]);
  }
  return out;
}

}  // namespace

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = {
      "ph",       "dissolved_oxygen", "bod",          "conductivity", "nitrate",
      "total_coliform", "temp",     "temp_present", "wqi",          "lag1_wqi",
      "lag1_present", "lag2_wqi",   "lag2_present", "month",        "year",
  };
  return names;
}

FeatureTable build_features(const ingest::Dataset& ds, wqi::Mode mode) {
  const auto records = wqi::compute_wqi_batch(ds.samples, mode);
  const std::size_t n = ds.samples.size();
  const std::size_t cols = feature_names().size();

  // lag[i][k] = wqi of the (k+1)-th previous observation of the same station.
  std::vector<std::array<std::optional<double>, kLags>> lags(n);
  for (const auto& [code, idx] : by_station(ds)) {
    for (std::size_t p = 0; p < idx.size(); ++p) {
      for (std::size_t k = 0; k < kLags && k < p; ++k) lags[idx[p]][k] = records[idx[p - k - 1]].wqi;
    }
  }

  std::vector<double> values;
  values.reserve(n * cols);
  FeatureTable table;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = ds.samples[i];
    const auto& in = records[i].inputs;
    values.insert(values.end(), {in.ph, in.dissolved_oxygen, in.bod, in.conductivity, in.nitrate,
                                 in.total_coliform, s.temp.value_or(0.0), s.temp ? 1.0 : 0.0, records[i].wqi});
    for (const auto& lag : lags[i]) {
      values.push_back(lag.value_or(0.0));
      values.push_back(lag ? 1.0 : 0.0);
    }
    values.push_back(static_cast<double>(s.month));
    values.push_back(static_cast<double>(s.year));
    table.keys.push_back({s.station_code, s.month, s.year});
    table.current_wqi.push_back(records[i].wqi);
  }
  table.features = gbm::FeatureMatrix(n, cols, std::move(values), feature_names());
  return table;
}

SupervisedTask build_supervised(const ingest::Dataset& ds, wqi::Mode mode) {
  const FeatureTable table = build_features(ds, mode);

  std::vector<std::optional<std::size_t>> target_of(ds.samples.size());
  for (const auto& [code, idx] : by_station(ds)) {
    for (std::size_t p = 0; p < idx.size(); ++p) {
      if (auto q = horizon_partner(ds, idx, p)) target_of[idx[p]] = idx[*q];
    }
  }

  std::vector<std::size_t> rows;
  std::vector<double> targets;
  for (std::size_t i = 0; i < target_of.size(); ++i) {
    if (!target_of[i]) continue;
    rows.push_back(i);
    targets.push_back(table.current_wqi[*target_of[i]]);
  }
  SupervisedTask task{table.features.select_rows(rows), std::move(targets), {}};
  for (std::size_t r : rows) task.keys.push_back(table.keys[r]);
  return task;
}

std::pair<SupervisedTask, SupervisedTask> split_by_station(const SupervisedTask& task, double test_fraction,
                                                           std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw std::out_of_range("test_fraction must be in [0, 1)");
  }
  std::set<std::string> unique;
  for (const auto& k : task.keys) unique.insert(k.station_code);
  std::vector<std::string> stations(unique.begin(), unique.end());

  // Fisher-Yates on the raw engine output so the split does not depend on
  // the standard library's distribution implementations.
  std::mt19937_64 rng(seed);
  for (std::size_t i = stations.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(stations[i - 1], stations[j]);
  }

  const std::size_t n = stations.size();
  std::size_t n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (test_fraction > 0.0 && n >= 2) n_test = std::max<std::size_t>(n_test, 1);
  if (n > 0) n_test = std::min(n_test, n - 1);
  const std::set<std::string> test_stations(stations.begin(), stations.begin() + static_cast<std::ptrdiff_t>(n_test));

  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t i = 0; i < task.keys.size(); ++i) {
    (test_stations.contains(task.keys[i].station_code) ? test_rows : train_rows).push_back(i);
  }
  return {subset(task, train_rows), subset(task, test_rows)};
}

double mse(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) throw EvalError(EvalErrorKind::length_mismatch, "length mismatch");
  if (actual.empty()) throw EvalError(EvalErrorKind::empty, "no examples");
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double d = actual[i] - predicted[i];
    sum += d * d;
  }
  return sum / static_cast<double>(actual.size());
}

double r_squared(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) throw EvalError(EvalErrorKind::length_mismatch, "length mismatch");
  if (actual.size() < 2 || std::all_of(actual.begin(), actual.end(), [&](double a) { return a == actual[0]; })) {
    throw EvalError(EvalErrorKind::degenerate_actuals, "actual values have no variance");
  }
  double mean = 0.0;
  for (double a : actual) mean += a;
  mean /= static_cast<double>(actual.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    ss_tot += (actual[i] - mean) * (actual[i] - mean);
  }
  return 1.0 - ss_res / ss_tot;
}

double percentile_error(double actual, double predicted) {
  if (actual == 0.0) throw EvalError(EvalErrorKind::zero_actual, "percentile error undefined for actual = 0");
  return std::abs(predicted - actual) / std::abs(actual) * 100.0;
}

EvalReport evaluate(const gbm::GbmModel& model, const SupervisedTask& task, Execution exec) {
  if (model.feature_names != task.features.feature_names()) {
    throw EvalError(EvalErrorKind::feature_mismatch, "model features do not match task features");
  }
  if (task.targets.empty()) throw EvalError(EvalErrorKind::empty, "no examples to evaluate");

  const std::vector<double> predicted = gbm::gbm_predict_batch(model, task.features, exec);
  EvalReport report;
  report.mse = mse(task.targets, predicted);
  try {
    report.r_squared = r_squared(task.targets, predicted);
  } catch (const EvalError&) {
    report.r_squared.reset();
  }

  double pct_sum = 0.0;
  std::size_t pct_n = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    ExampleResult ex{task.keys[i], task.targets[i], predicted[i], std::nullopt};
    if (task.targets[i] != 0.0) {
      ex.percentile_error = percentile_error(task.targets[i], predicted[i]);
      pct_sum += *ex.percentile_error;
      ++pct_n;
    }
    report.per_example.push_back(std::move(ex));
  }
  report.mean_percentile_error = pct_n ? pct_sum / static_cast<double>(pct_n) : 0.0;
  return report;
}

std::string format_summary(const EvalReport& report) {
  return "mse=" + csv::format_shortest(report.mse) +
         " r2=" + (report.r_squared ? csv::format_shortest(*report.r_squared) : std::string("nan")) +
         " mean_pct_err=" + csv::format_shortest(report.mean_percentile_error);
}

std::string eval_report_csv(const EvalReport& report) {
  std::string out = "station_code,month,year,actual,predicted,percentile_error\n";
  for (const auto& ex : report.per_example) {
    out += csv::join({ex.key.station_code, std::to_string(ex.key.month), std::to_string(ex.key.year),
                      csv::format_shortest(ex.actual), csv::format_shortest(ex.predicted),
                      ex.percentile_error ? csv::format_shortest(*ex.percentile_error) : std::string()});
    out += "\n";
  }
  return out;
}

std::string training_curve_csv(std::span<const double> curve) {
  std::string out = "iteration,loss\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out += std::to_string(i) + "," + csv::format_shortest(curve[i]) + "\n";
  }
  return out;
}

}  // namespace aquagauge::forecast
