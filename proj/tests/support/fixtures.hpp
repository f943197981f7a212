#pragma once

// Deterministic generators and worked-example fixtures shared by the unit,
// integration and acceptance suites.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "aquagauge/gbm.hpp"
#include "aquagauge/wqi.hpp"

namespace aquagauge::testing {

// Platform-independent draws straight from the engine bits.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

struct Regression {
  gbm::FeatureMatrix x;
  std::vector<double> y;
};

// 4 features on [-1, 1]; y = 2 sin(pi x0) + 2 x1^2 + x2 + N(0, 0.3^2); x3 is noise.
inline Regression additive_task(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> values;
  std::vector<double> y;
  for (std::size_t i = 0; i < n; ++i) {
    double f[4];
    for (double& v : f) v = rng.uniform(-1.0, 1.0);
    values.insert(values.end(), std::begin(f), std::end(f));
    y.push_back(2.0 * std::sin(std::numbers::pi * f[0]) + 2.0 * f[1] * f[1] + f[2] + 0.3 * rng.normal());
  }
  return {gbm::FeatureMatrix(n, 4, std::move(values), {"x0", "x1", "x2", "x3"}), std::move(y)};
}

// A worked WQI row: six inputs plus the printed weighted scores and total.
struct GoldenRow {
  const char* label;
  wqi::Mode mode;
  wqi::WqiInputs inputs;  // ph, do, bod, ec, na, tc
  double wph, wdo, wbdo, wec, wna, wco, wqi;
};

// Published data-analysis rows. The "1998" coliform cell is printed as "35."
// but only 350 reproduces the printed wco; it is entered as 350.
inline const std::vector<GoldenRow>& golden_rows() {
  static const std::vector<GoldenRow> rows = {
      {"Serial 2 Mirpur", wqi::Mode::legacy_nco, {6.9, 6.3, 1.7, 179.0, 0.1, 5330.0},
       13.2, 28.10, 23.40, 0.54, 2.8, 11.24, 79.28},
      {"Serial 3 Dighala", wqi::Mode::legacy_nco, {6.9, 5.8, 3.8, 64.0, 0.5, 84443.0},
       13.2, 22.48, 18.72, 0.90, 2.8, 11.24, 69.34},
      {"Serial 4 Tala", wqi::Mode::legacy_nco, {6.7, 6.1, 1.4, 308.0, 0.3, 5672.0},
       9.9, 28.10, 23.40, 0.00, 2.8, 11.24, 75.44},
      {"Serial 1997 Jessore", wqi::Mode::normative, {3.0, 4.6, 6.2, 350.0, 2.2, 49.0},
       0.0, 16.86, 14.04, 0.00, 2.8, 22.48, 56.18},
      {"Serial 1998 Magura", wqi::Mode::normative, {7.1, 10.0, 1.0, 150.0, 4.0, 350.0},
       16.5, 28.10, 23.40, 0.72, 2.8, 16.86, 88.38},
      {"Serial 2000 Foridpur", wqi::Mode::normative, {7.3, 9.0, 1.8, 158.0, 7.2, 280.0},
       16.5, 28.10, 23.40, 0.54, 2.8, 16.86, 88.20},
  };
  return rows;
}

// Prediction table: current wqi, predicted wqi, printed percentile error,
// printed disease and decision.
struct PredictionRow {
  double wqi;
  double predicted;
  double printed_pct_error;
  const char* disease;
  const char* decision;
};

inline const std::vector<PredictionRow>& prediction_rows() {
  static const std::vector<PredictionRow> rows = {
      {63.253922, 69.959334, 10.6, "No Production", "Minimize acidity by using soda lime"},
      {78.969041, 83.966075, 6.3, "No Disease", "Comfortable"},
      {77.549000, 81.307586, 4.8, "No disease", "Comfortable"},
      {75.058490, 67.314328, 10.4, "Slow Growth", "Protein Synthesis"},
      {50.570943, 52.655839, 4.1, "White sturgeon", "Use Potassium"},
  };
  return rows;
}

// Record carrying a given wqi with benign sub-indices (all 80 or 100 and an
// in-band pH), so only the overall-index rules can fire.
inline wqi::WqiRecord benign_record(double wqi_value) {
  wqi::WqiRecord rec = wqi::compute_wqi(wqi::WqiInputs{7.5, 7.0, 2.0, 100.0, 10.0, 20.0});
  rec.wqi = wqi_value;
  return rec;
}

// A random record whose fields are individually valid.
inline wqi::WqiRecord random_record(Rng& rng) {
  wqi::WqiInputs in{rng.uniform(0.0, 14.0),    rng.uniform(0.0, 12.0),   rng.uniform(0.0, 150.0),
                    rng.uniform(0.0, 400.0),   rng.uniform(0.0, 250.0),  rng.uniform(0.0, 20000.0)};
  return wqi::compute_wqi(in, rng.integer(0, 1) ? wqi::Mode::legacy_nco : wqi::Mode::normative);
}

}  // namespace aquagauge::testing
