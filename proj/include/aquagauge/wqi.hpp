#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "aquagauge/error.hpp"
#include "aquagauge/ingest.hpp"

namespace aquagauge::wqi {

// normative scores total coliform above every band as 0. legacy_nco scores
// it as 40, which is what some published worked rows contain.
enum class Mode { normative, legacy_nco };

std::string_view mode_name(Mode m);

enum class Parameter { ph, dissolved_oxygen, bod, conductivity, nitrate, total_coliform };

inline constexpr std::array<Parameter, 6> kParameters = {
    Parameter::ph,           Parameter::dissolved_oxygen, Parameter::bod,
    Parameter::conductivity, Parameter::nitrate,          Parameter::total_coliform,
};

enum class WqiErrorKind { non_finite, out_of_range, missing_input };

class WqiError : public KindedError<WqiErrorKind> {
 public:
  using KindedError::KindedError;
};

// Band scores. Every field is one of {0, 40, 60, 80, 100}.
struct SubIndices {
  int nph = 0;
  int ndo = 0;
  int nbdo = 0;
  int nec = 0;
  int nna = 0;
  int nco = 0;

  friend bool operator==(const SubIndices&, const SubIndices&) = default;
};

struct WeightedScores {
  double wph = 0.0;
  double wdo = 0.0;
  double wbdo = 0.0;
  double wec = 0.0;
  double wna = 0.0;
  double wco = 0.0;

  friend bool operator==(const WeightedScores&, const WeightedScores&) = default;
};

// Weights in thousandths: 0.165, 0.281, 0.234, 0.009, 0.028, 0.281.
// Order follows kParameters.
inline constexpr std::array<int, 6> kWeightPerMille = {165, 281, 234, 9, 28, 281};

// 0.998 * 100.
inline constexpr double kMaxWqi = 99.8;

struct WqiInputs {
  double ph = 0.0;
  double dissolved_oxygen = 0.0;
  double bod = 0.0;
  double conductivity = 0.0;
  double nitrate = 0.0;
  double total_coliform = 0.0;

  friend bool operator==(const WqiInputs&, const WqiInputs&) = default;
};

struct WqiRecord {
  WqiInputs inputs;
  SubIndices sub;
  WeightedScores weighted;
  double wqi = 0.0;
  Mode mode = Mode::normative;
};

// Band score of one parameter. Bands are tried in published order and are
// closed on both ends, so the first match wins on shared boundaries
// (pH 6.7 -> 60, conductivity 150 -> 80). A value that falls in a hole
// between two published bands takes the larger of the two neighbouring
// scores. A value outside every band scores 0, except total coliform above
// 1000 in legacy_nco mode, which scores 40.
int sub_index(Parameter p, double value, Mode mode = Mode::normative);

WeightedScores weighted_scores(const SubIndices& sub);

// Sum of the weighted scores, computed from the integer band scores so the
// result is the correctly rounded value of the exact sum.
double wqi_from_subindices(const SubIndices& sub);

WqiRecord compute_wqi(const WqiInputs& in, Mode mode = Mode::normative);

// Uses total coliform (not fecal) for the coliform sub-index. Throws
// WqiError(missing_input) naming the first absent input.
WqiRecord compute_wqi(const ingest::WaterSample& s, Mode mode = Mode::normative);

std::vector<WqiRecord> compute_wqi_batch(std::span<const ingest::WaterSample> samples, Mode mode,
                                         Execution exec = Execution::parallel);

}  // namespace aquagauge::wqi
