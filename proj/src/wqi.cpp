#include "aquagauge/wqi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace aquagauge::wqi {
namespace {

struct Band {
  double lo;
  double hi;
  int score;
};

constexpr double kOpen = std::numeric_limits<double>::infinity();

// Published band order; first match wins.
constexpr Band kPhBands[] = {
    {7.0, 8.5, 100}, {8.5, 8.6, 80}, {6.8, 6.9, 80}, {8.6, 8.8, 60},
    {6.7, 6.8, 60},  {8.8, 9.0, 40}, {6.5, 6.7, 40},
};
constexpr Band kDoBands[] = {{6.0, kOpen, 100}, {5.1, 6.0, 80}, {4.1, 5.0, 60}, {3.0, 4.0, 40}};
constexpr Band kBodBands[] = {{0.0, 3.0, 100}, {3.0, 6.0, 80}, {6.0, 80.0, 60}, {80.0, 125.0, 40}};
constexpr Band kEcBands[] = {{0.0, 75.0, 100}, {75.0, 150.0, 80}, {150.0, 225.0, 60}, {225.0, 300.0, 40}};
constexpr Band kNaBands[] = {{0.0, 20.0, 100}, {20.0, 50.0, 80}, {50.0, 100.0, 60}, {100.0, 200.0, 40}};
constexpr Band kTcBands[] = {{0.0, 5.0, 100}, {5.0, 50.0, 80}, {50.0, 500.0, 60}, {500.0, 1000.0, 40}};

constexpr double kLegacyColiformCutoff = 1000.0;
constexpr int kLegacyColiformScore = 40;

std::span<const Band> bands_for(Parameter p) {
  switch (p) {
    case Parameter::ph: return kPhBands;
    case Parameter::dissolved_oxygen: return kDoBands;
    case Parameter::bod: return kBodBands;
    case Parameter::conductivity: return kEcBands;
    case Parameter::nitrate: return kNaBands;
    case Parameter::total_coliform: return kTcBands;
  }
  return {};
}

int score_in(std::span<const Band> bands, double v) {
  for (const Band& b : bands) {
    if (v >= b.lo && v <= b.hi) return b.score;
  }
  // Hole between two bands: take the larger neighbouring score.
  double below_hi = -kOpen;
  double above_lo = kOpen;
  int below_score = 0;
  int above_score = 0;
  for (const Band& b : bands) {
    if (b.hi < v && (b.hi > below_hi || (b.hi == below_hi && b.score > below_score))) {
      below_hi = b.hi;
      below_score = b.score;
    }
    if (b.lo > v && (b.lo < above_lo || (b.lo == above_lo && b.score > above_score))) {
      above_lo = b.lo;
      above_score = b.score;
    }
  }
  if (below_hi == -kOpen || above_lo == kOpen) return 0;
  return std::max(below_score, above_score);
}

int score(Parameter p, double value, Mode mode) {
  if (p == Parameter::total_coliform && mode == Mode::legacy_nco && value > kLegacyColiformCutoff) {
    return kLegacyColiformScore;
  }
  return score_in(bands_for(p), value);
}

WqiRecord compute_unchecked(const WqiInputs& in, Mode mode) {
  WqiRecord rec;
  rec.inputs = in;
  rec.mode = mode;
  rec.sub = SubIndices{
      score(Parameter::ph, in.ph, mode),
      score(Parameter::dissolved_oxygen, in.dissolved_oxygen, mode),
      score(Parameter::bod, in.bod, mode),
      score(Parameter::conductivity, in.conductivity, mode),
      score(Parameter::nitrate, in.nitrate, mode),
      score(Parameter::total_coliform, in.total_coliform, mode),
  };
  rec.weighted = weighted_scores(rec.sub);
  rec.wqi = wqi_from_subindices(rec.sub);
  return rec;
}

void check_value(Parameter p, double value) {
  if (!std::isfinite(value)) {
    throw WqiError(WqiErrorKind::non_finite, "non-finite input value " + std::to_string(value));
  }
  if (p == Parameter::ph && (value < 0.0 || value > 14.0)) {
    throw WqiError(WqiErrorKind::out_of_range, "pH " + std::to_string(value) + " outside [0, 14]");
  }
}

void validate(const WqiInputs& in) {
  check_value(Parameter::ph, in.ph);
  for (double v : {in.dissolved_oxygen, in.bod, in.conductivity, in.nitrate, in.total_coliform}) {
    check_value(Parameter::bod, v);
  }
}

WqiInputs inputs_of(const ingest::WaterSample& s) {
  if (auto missing = ingest::first_missing_wqi_input(s)) {
    throw WqiError(WqiErrorKind::missing_input, "sample from station " + s.station_code + " " +
                                                    ingest::format_month_year(s.month, s.year) +
                                                    " is missing " + std::string(*missing));
  }
  WqiInputs in{*s.ph, *s.dissolved_oxygen, *s.bod, *s.conductivity, *s.nitrate, *s.total_coliform};
  validate(in);
  return in;
}

}  // namespace

std::string_view mode_name(Mode m) {
  return m == Mode::normative ? "normative" : "legacy-nco";
}

int sub_index(Parameter p, double value, Mode mode) {
  check_value(p, value);
  return score(p, value, mode);
}

WeightedScores weighted_scores(const SubIndices& sub) {
  auto w = [](int score, int per_mille) { return static_cast<double>(score * per_mille) / 1000.0; };
  return WeightedScores{
      w(sub.nph, kWeightPerMille[0]), w(sub.ndo, kWeightPerMille[1]), w(sub.nbdo, kWeightPerMille[2]),
      w(sub.nec, kWeightPerMille[3]), w(sub.nna, kWeightPerMille[4]), w(sub.nco, kWeightPerMille[5]),
  };
}

double wqi_from_subindices(const SubIndices& sub) {
  const int total = sub.nph * kWeightPerMille[0] + sub.ndo * kWeightPerMille[1] +
                    sub.nbdo * kWeightPerMille[2] + sub.nec * kWeightPerMille[3] +
                    sub.nna * kWeightPerMille[4] + sub.nco * kWeightPerMille[5];
  return static_cast<double>(total) / 1000.0;
}

WqiRecord compute_wqi(const WqiInputs& in, Mode mode) {
  validate(in);
  return compute_unchecked(in, mode);
}

WqiRecord compute_wqi(const ingest::WaterSample& s, Mode mode) { return compute_wqi(inputs_of(s), mode); }

std::vector<WqiRecord> compute_wqi_batch(std::span<const ingest::WaterSample> samples, Mode mode,
                                         Execution exec) {
  // Validate serially so errors surface outside the parallel region.
  std::vector<WqiInputs> inputs;
  inputs.reserve(samples.size());
  for (const auto& s : samples) inputs.push_back(inputs_of(s));

  std::vector<WqiRecord> out(samples.size());
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = compute_unchecked(inputs[i], mode);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = compute_unchecked(inputs[i], mode);
  }
  return out;
}

}  // namespace aquagauge::wqi
