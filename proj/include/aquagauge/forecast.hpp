#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aquagauge/error.hpp"
#include "aquagauge/gbm.hpp"
#include "aquagauge/ingest.hpp"
#include "aquagauge/wqi.hpp"

namespace aquagauge::forecast {

enum class EvalErrorKind { length_mismatch, empty, degenerate_actuals, zero_actual, feature_mismatch };

class EvalError : public KindedError<EvalErrorKind> {
 public:
  using KindedError::KindedError;
};

// Months between a feature observation and its target.
inline constexpr int kHorizonMonths = 4;
inline constexpr int kHorizonToleranceMonths = 1;

struct ExampleKey {
  std::string station_code;
  int month = 1;
  int year = 1970;

  friend bool operator==(const ExampleKey&, const ExampleKey&) = default;
};

// Column order of every forecasting feature matrix.
const std::vector<std::string>& feature_names();

// One feature row per observation, whether or not a target exists for it.
struct FeatureTable {
  gbm::FeatureMatrix features;
  std::vector<ExampleKey> keys;
  std::vector<double> current_wqi;
};

struct SupervisedTask {
  gbm::FeatureMatrix features;
  std::vector<double> targets;
  std::vector<ExampleKey> keys;
};

// Features for every sample: the six WQI inputs, temperature with a presence
// flag, current wqi, the two previous wqi values of the same station with
// presence flags, month and year. Samples must carry all six WQI inputs.
FeatureTable build_features(const ingest::Dataset& ds, wqi::Mode mode);

// Pairs each observation with the same station's observation 4 months later
// (±1 month; nearest wins, ties go to the earlier one).
SupervisedTask build_supervised(const ingest::Dataset& ds, wqi::Mode mode);

// Splits by station so no station appears on both sides. Deterministic in
// seed. The training side always keeps at least one station.
std::pair<SupervisedTask, SupervisedTask> split_by_station(const SupervisedTask& task,
                                                           double test_fraction,
                                                           std::uint64_t seed);

double mse(std::span<const double> actual, std::span<const double> predicted);
double r_squared(std::span<const double> actual, std::span<const double> predicted);
// |predicted − actual| / |actual| × 100.
double percentile_error(double actual, double predicted);

struct ExampleResult {
  ExampleKey key;
  double actual = 0.0;
  double predicted = 0.0;
  std::optional<double> percentile_error;  // absent when actual == 0
};

struct EvalReport {
  double mse = 0.0;
  std::optional<double> r_squared;  // absent when the actuals have no variance
  double mean_percentile_error = 0.0;
  std::vector<ExampleResult> per_example;
};

EvalReport evaluate(const gbm::GbmModel& model, const SupervisedTask& task,
                    Execution exec = Execution::parallel);

// "mse=<v> r2=<v> mean_pct_err=<v>"
std::string format_summary(const EvalReport& report);
std::string eval_report_csv(const EvalReport& report);
// "iteration,loss" rows, iteration 0 being the constant model.
std::string training_curve_csv(std::span<const double> curve);

}  // namespace aquagauge::forecast
