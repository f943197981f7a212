#pragma once

#include <string>
#include <string_view>

#include "aquagauge/error.hpp"
#include "aquagauge/gbm.hpp"

namespace aquagauge::gbm {

enum class ModelFormatErrorKind { bad_magic, unsupported_version, corrupt_header, corrupt_node };

class ModelFormatError : public KindedError<ModelFormatErrorKind> {
 public:
  using KindedError::KindedError;
};

inline constexpr std::string_view kModelMagic = "AQUAGAUGE-GBM";
inline constexpr int kModelFormatVersion = 1;

// Line-oriented text:
//
//   AQUAGAUGE-GBM
//   version 1
//   loss=squared_error
//   n_trees=...            (hyperparameters, f0, feature_names, training_curve)
//   tree <t> nodes <k>
//   I <feature> <threshold> <left> <right>
//   L <value> <train_count>
//   ...
//   end
//
// Reals are written with 17 significant digits so a round trip is exact.
std::string serialize_model(const GbmModel& model);

// Either returns a complete, structurally valid model or throws
// ModelFormatError. Internal-node train counts are rebuilt from the leaves.
GbmModel deserialize_model(std::string_view text);

}  // namespace aquagauge::gbm
