#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aquagauge/error.hpp"

namespace aquagauge::ingest {

enum class Strictness { strict, lenient };
enum class ImputePolicy { drop_row, median };

enum class IngestErrorKind {
  missing_column,
  malformed_row,
  empty_input,
  bad_date_token,
  all_missing_column,
};

class IngestError : public KindedError<IngestErrorKind> {
 public:
  IngestError(IngestErrorKind kind, const std::string& what, std::size_t row = 0)
      : KindedError(kind, what), row_(row) {}

  // 1-based data row for malformed_row, otherwise 0.
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// Canonical columns of a monitoring-station export. Header cells are matched
// after normalization (see normalize_column_name).
enum class Column {
  serial,
  station_code,
  location,
  state,
  temp,
  dissolved_oxygen,
  ph,
  conductivity,
  bod,
  nitrate,
  fecal_coliform,
  total_coliform,
  month_year,
};

std::string_view column_name(Column c);

// Drops parenthesized unit suffixes, lowercases, and removes everything that
// is not [a-z0-9]: "B.O.D." -> "bod", "D.O. (mg/l)" -> "do".
std::string normalize_column_name(std::string_view header_cell);

std::optional<Column> canonical_column(std::string_view header_cell);

struct RawDataset {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

RawDataset read_raw(std::string_view csv_text);

// Conductivity is in micro-mhos/cm; coliform counts are MPN/100ml.
struct WaterSample {
  std::string station_code;
  std::string location;
  std::string state;
  std::optional<double> temp;
  std::optional<double> dissolved_oxygen;
  std::optional<double> ph;
  std::optional<double> conductivity;
  std::optional<double> bod;
  std::optional<double> nitrate;
  std::optional<double> fecal_coliform;
  std::optional<double> total_coliform;
  int month = 1;
  int year = 1970;

  friend bool operator==(const WaterSample&, const WaterSample&) = default;
};

// Index of the month on a continuous axis (year * 12 + month - 1).
inline int month_index(const WaterSample& s) { return s.year * 12 + s.month - 1; }

// Name of the first of the six WQI inputs that is missing, if any.
std::optional<std::string_view> first_missing_wqi_input(const WaterSample& s);
bool has_all_wqi_inputs(const WaterSample& s);
bool has_any_wqi_input(const WaterSample& s);

// One log line. `row` is the 1-based data row number in the source file
// (the header is row 0).
struct RowNote {
  std::size_t row = 0;
  std::string reason;

  friend bool operator==(const RowNote&, const RowNote&) = default;
};

struct Provenance {
  std::string source;
  std::size_t input_rows = 0;
  std::vector<RowNote> dropped;  // rows not represented in samples
  std::vector<RowNote> notes;    // coercions, merges, imputations
};

// samples are sorted by (station_code, year, month); source_rows[i] is the
// data row samples[i] came from.
struct Dataset {
  std::vector<WaterSample> samples;
  std::vector<std::size_t> source_rows;
  Provenance provenance;
};

struct MonthYear {
  int month;
  int year;

  friend bool operator==(const MonthYear&, const MonthYear&) = default;
};

// Accepts "M-YYYY" or "MM-YYYY"; month 1..12, year 1900..2100.
MonthYear parse_month_year(std::string_view token);
std::string format_month_year(int month, int year);

enum class CellKind { number, missing, invalid };

struct Cell {
  CellKind kind;
  double value = 0.0;
};

// Empty cells and the case-insensitive tokens nan, na, n/a and "-" are
// missing. Anything else that is not a finite decimal number is invalid.
Cell classify_cell(std::string_view cell);

// Never throws; invalid tokens also yield nullopt.
std::optional<double> coerce_numeric(std::string_view cell);

Dataset parse_dataset(std::string_view csv_text, Strictness strictness = Strictness::lenient,
                      std::string source = {});

Dataset impute_missing(Dataset ds, ImputePolicy policy);

// Writes the canonical header and one row per sample; parse_dataset on the
// result reproduces ds.samples.
std::string serialize_dataset(const Dataset& ds);

// "row <n>: <reason>" per dropped row, then the same for notes.
std::string format_row_log(const Provenance& p);

}  // namespace aquagauge::ingest
