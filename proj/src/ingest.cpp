#include "aquagauge/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <tuple>
#include <utility>

#include "aquagauge/csv.hpp"

namespace aquagauge::ingest {
namespace {

struct Alias {
  std::string_view normalized;
  Column column;
};

constexpr Alias kAliases[] = {
    {"serialno", Column::serial},
    {"serial", Column::serial},
    {"sn", Column::serial},
    {"slno", Column::serial},
    {"stationcode", Column::station_code},
    {"station", Column::station_code},
    {"locations", Column::location},
    {"location", Column::location},
    {"state", Column::state},
    {"temp", Column::temp},
    {"temperature", Column::temp},
    {"do", Column::dissolved_oxygen},
    {"dissolvedoxygen", Column::dissolved_oxygen},
    {"ph", Column::ph},
    {"conductivity", Column::conductivity},
    {"ec", Column::conductivity},
    {"co", Column::conductivity},
    {"bod", Column::bod},
    {"nitratenannnitritenann", Column::nitrate},
    {"nitratenitrite", Column::nitrate},
    {"nitrate", Column::nitrate},
    {"na", Column::nitrate},
    {"fecalcoliform", Column::fecal_coliform},
    {"fc", Column::fecal_coliform},
    {"totalcoliform", Column::total_coliform},
    {"totalcoliformmean", Column::total_coliform},
    {"tc", Column::total_coliform},
    {"monthandyear", Column::month_year},
    {"monthyear", Column::month_year},
    {"date", Column::month_year},
};

constexpr std::array kRequired = {
    Column::station_code, Column::location,     Column::state,   Column::temp,
    Column::dissolved_oxygen, Column::ph,       Column::conductivity, Column::bod,
    Column::nitrate,      Column::fecal_coliform, Column::total_coliform, Column::month_year,
};

using Measure = std::optional<double> WaterSample::*;

struct NumericColumn {
  Column column;
  Measure field;
  double min;
  double max;
};

constexpr double kInf = HUGE_VAL;

const std::array<NumericColumn, 8> kNumericColumns = {{
    {Column::temp, &WaterSample::temp, -kInf, kInf},
    {Column::dissolved_oxygen, &WaterSample::dissolved_oxygen, 0.0, kInf},
    {Column::ph, &WaterSample::ph, 0.0, 14.0},
    {Column::conductivity, &WaterSample::conductivity, 0.0, kInf},
    {Column::bod, &WaterSample::bod, 0.0, kInf},
    {Column::nitrate, &WaterSample::nitrate, 0.0, kInf},
    {Column::fecal_coliform, &WaterSample::fecal_coliform, 0.0, kInf},
    {Column::total_coliform, &WaterSample::total_coliform, 0.0, kInf},
}};

struct WqiInput {
  std::string_view name;
  Measure field;
};

// The six inputs of the index, in reporting order.
const std::array<WqiInput, 6> kWqiInputs = {{
    {"ph", &WaterSample::ph},
    {"dissolved_oxygen", &WaterSample::dissolved_oxygen},
    {"bod", &WaterSample::bod},
    {"conductivity", &WaterSample::conductivity},
    {"nitrate", &WaterSample::nitrate},
    {"total_coliform", &WaterSample::total_coliform},
}};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string row_prefix(std::size_t row) { return "row " + std::to_string(row) + ": "; }

}  // namespace

std::string_view column_name(Column c) {
  switch (c) {
    case Column::serial: return "serial";
    case Column::station_code: return "station_code";
    case Column::location: return "location";
    case Column::state: return "state";
    case Column::temp: return "temp";
    case Column::dissolved_oxygen: return "dissolved_oxygen";
    case Column::ph: return "ph";
    case Column::conductivity: return "conductivity";
    case Column::bod: return "bod";
    case Column::nitrate: return "nitrate";
    case Column::fecal_coliform: return "fecal_coliform";
    case Column::total_coliform: return "total_coliform";
    case Column::month_year: return "month_year";
  }
  return "?";
}

std::string normalize_column_name(std::string_view header_cell) {
  std::string out;
  int depth = 0;
  for (char c : header_cell) {
    if (c == '(') {
      ++depth;
    } else if (c == ')') {
      if (depth > 0) --depth;
    } else if (depth == 0 && std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

std::optional<Column> canonical_column(std::string_view header_cell) {
  const std::string key = normalize_column_name(header_cell);
  for (const auto& alias : kAliases) {
    if (alias.normalized == key) return alias.column;
  }
  return std::nullopt;
}

RawDataset read_raw(std::string_view csv_text) {
  auto records = csv::parse(csv_text);
  if (records.empty()) throw IngestError(IngestErrorKind::empty_input, "empty input: no header row");
  RawDataset raw;
  raw.header = std::move(records.front());
  raw.rows.assign(std::make_move_iterator(records.begin() + 1),
                  std::make_move_iterator(records.end()));
  return raw;
}

std::optional<std::string_view> first_missing_wqi_input(const WaterSample& s) {
  for (const auto& in : kWqiInputs) {
    if (!(s.*in.field)) return in.name;
  }
  return std::nullopt;
}

bool has_all_wqi_inputs(const WaterSample& s) { return !first_missing_wqi_input(s); }

bool has_any_wqi_input(const WaterSample& s) {
  return std::any_of(kWqiInputs.begin(), kWqiInputs.end(),
                     [&](const WqiInput& in) { return (s.*in.field).has_value(); });
}

MonthYear parse_month_year(std::string_view token) {
  const std::string_view t = csv::trim(token);
  auto bad = [&]() { return IngestError(IngestErrorKind::bad_date_token, "bad month-year token '" + std::string(token) + "'"); };

  const auto dash = t.find('-');
  if (dash == std::string_view::npos) throw bad();
  const std::string_view m = t.substr(0, dash);
  const std::string_view y = t.substr(dash + 1);
  if (m.size() < 1 || m.size() > 2 || !all_digits(m) || y.size() != 4 || !all_digits(y)) throw bad();

  MonthYear out{};
  std::from_chars(m.data(), m.data() + m.size(), out.month);
  std::from_chars(y.data(), y.data() + y.size(), out.year);
  if (out.month < 1 || out.month > 12 || out.year < 1900 || out.year > 2100) throw bad();
  return out;
}

std::string format_month_year(int month, int year) {
  return std::to_string(month) + "-" + std::to_string(year);
}

Cell classify_cell(std::string_view cell) {
  std::string_view t = csv::trim(cell);
  if (t.empty()) return {CellKind::missing};
  const std::string low = lower(t);
  if (low == "nan" || low == "na" || low == "n/a" || low == "-") return {CellKind::missing};

  if (t.front() == '+') {
    t.remove_prefix(1);
    if (t.empty() || t.front() == '+' || t.front() == '-') return {CellKind::invalid};
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v)) {
    return {CellKind::invalid};
  }
  return {CellKind::number, v};
}

std::optional<double> coerce_numeric(std::string_view cell) {
  const Cell c = classify_cell(cell);
  if (c.kind == CellKind::number) return c.value;
  return std::nullopt;
}

Dataset parse_dataset(std::string_view csv_text, Strictness strictness, std::string source) {
  const RawDataset raw = read_raw(csv_text);
  const bool strict = strictness == Strictness::strict;

  std::map<Column, std::size_t> index;
  for (std::size_t i = 0; i < raw.header.size(); ++i) {
    if (auto col = canonical_column(raw.header[i])) index.try_emplace(*col, i);
  }
  for (Column c : kRequired) {
    if (!index.contains(c)) {
      throw IngestError(IngestErrorKind::missing_column,
                        "missing column '" + std::string(column_name(c)) + "'");
    }
  }

  Dataset ds;
  ds.provenance.source = std::move(source);
  ds.provenance.input_rows = raw.rows.size();
  std::vector<std::pair<WaterSample, std::size_t>> kept;

  const std::size_t arity = raw.header.size();
  const std::size_t loc = index.at(Column::location);

  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    const std::size_t row_no = r + 1;
    std::vector<std::string> cells = raw.rows[r];

    auto reject = [&](const std::string& reason) {
      if (strict) {
        throw IngestError(IngestErrorKind::malformed_row, row_prefix(row_no) + reason, row_no);
      }
      ds.provenance.dropped.push_back({row_no, reason});
    };

    if (cells.size() > arity) {
      // Unquoted commas inside the free-text location ("Mirpur Area, Dhaka").
      const std::size_t extra = cells.size() - arity;
      std::string merged = cells[loc];
      for (std::size_t k = 1; k <= extra; ++k) merged += "," + cells[loc + k];
      cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(loc) + 1,
                  cells.begin() + static_cast<std::ptrdiff_t>(loc + extra) + 1);
      cells[loc] = merged;
      ds.provenance.notes.push_back(
          {row_no, "merged " + std::to_string(extra) + " unquoted comma(s) into location"});
    }
    if (cells.size() != arity) {
      reject("expected " + std::to_string(arity) + " cells, found " + std::to_string(cells.size()));
      continue;
    }

    auto cell = [&](Column c) -> std::string_view { return cells[index.at(c)]; };

    WaterSample s;
    s.station_code = std::string(csv::trim(cell(Column::station_code)));
    s.location = std::string(csv::trim(cell(Column::location)));
    s.state = std::string(csv::trim(cell(Column::state)));
    if (s.station_code.empty()) {
      reject("empty station code");
      continue;
    }

    try {
      const MonthYear my = parse_month_year(cell(Column::month_year));
      s.month = my.month;
      s.year = my.year;
    } catch (const IngestError& e) {
      reject(e.what());
      continue;
    }

    bool rejected = false;
    for (const auto& nc : kNumericColumns) {
      const std::string_view text = cell(nc.column);
      const std::string name(column_name(nc.column));
      const Cell c = classify_cell(text);
      if (c.kind == CellKind::number) {
        if (c.value < nc.min || c.value > nc.max) {
          const std::string why = name + " value " + std::string(csv::trim(text)) + " out of range";
          if (strict) {
            reject(why);
            rejected = true;
            break;
          }
          ds.provenance.notes.push_back({row_no, why + "; treated as missing"});
        } else {
          s.*nc.field = c.value;
        }
      } else if (c.kind == CellKind::invalid) {
        const std::string why = "coercion failure in " + name + ": '" + std::string(csv::trim(text)) + "'";
        if (strict) {
          reject(why);
          rejected = true;
          break;
        }
        ds.provenance.notes.push_back({row_no, why});
      } else if (!csv::trim(text).empty()) {
        ds.provenance.notes.push_back(
            {row_no, "coercion failure in " + name + ": '" + std::string(csv::trim(text)) + "' read as missing"});
      }
    }
    if (rejected) continue;

    if (!has_any_wqi_input(s)) {
      ds.provenance.dropped.push_back({row_no, "all six WQI inputs missing"});
      continue;
    }
    kept.emplace_back(std::move(s), row_no);
  }

  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    const auto& x = a.first;
    const auto& y = b.first;
    return std::tie(x.station_code, x.year, x.month) < std::tie(y.station_code, y.year, y.month);
  });
  ds.samples.reserve(kept.size());
  ds.source_rows.reserve(kept.size());
  for (auto& [sample, row] : kept) {
    ds.samples.push_back(std::move(sample));
    ds.source_rows.push_back(row);
  }
  return ds;
}

Dataset impute_missing(Dataset ds, ImputePolicy policy) {
  if (policy == ImputePolicy::drop_row) {
    Dataset out;
    out.provenance = std::move(ds.provenance);
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      if (auto missing = first_missing_wqi_input(ds.samples[i])) {
        out.provenance.dropped.push_back({ds.source_rows[i], "missing " + std::string(*missing)});
        continue;
      }
      out.samples.push_back(std::move(ds.samples[i]));
      out.source_rows.push_back(ds.source_rows[i]);
    }
    return out;
  }

  for (const auto& in : kWqiInputs) {
    std::vector<double> observed;
    bool any_missing = false;
    for (const auto& s : ds.samples) {
      if (s.*in.field) {
        observed.push_back(*(s.*in.field));
      } else {
        any_missing = true;
      }
    }
    if (!any_missing) continue;
    if (observed.empty()) {
      throw IngestError(IngestErrorKind::all_missing_column,
                        "column '" + std::string(in.name) + "' has no observed values to impute from");
    }
    std::sort(observed.begin(), observed.end());
    const std::size_t n = observed.size();
    const double median = n % 2 ? observed[n / 2] : (observed[n / 2 - 1] + observed[n / 2]) / 2.0;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      auto& slot = ds.samples[i].*in.field;
      if (slot) continue;
      slot = median;
      ds.provenance.notes.push_back(
          {ds.source_rows[i], "imputed " + std::string(in.name) + " = " + csv::format_shortest(median)});
    }
  }
  return ds;
}

std::string serialize_dataset(const Dataset& ds) {
  std::string out =
      "Serial No,STATION CODE,LOCATIONS,State,Temp,D.O. (mg/l),pH,CONDUCTIVITY,B.O.D.,"
      "NITRATENAN N+ NITRITENANN (mg/l),FECAL COLIFORM (MPN/100ml),"
      "Total COLIFORM (MPN/100ml) Mean,Month and year\n";
  auto num = [](const std::optional<double>& v) { return v ? csv::format_shortest(*v) : std::string(); };
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& s = ds.samples[i];
    out += csv::join({std::to_string(i), s.station_code, s.location, s.state, num(s.temp),
                      num(s.dissolved_oxygen), num(s.ph), num(s.conductivity), num(s.bod),
                      num(s.nitrate), num(s.fecal_coliform), num(s.total_coliform),
                      format_month_year(s.month, s.year)});
    out.push_back('\n');
  }
  return out;
}

std::string format_row_log(const Provenance& p) {
  std::string out;
  for (const auto& d : p.dropped) out += "row " + std::to_string(d.row) + ": " + d.reason + "\n";
  for (const auto& n : p.notes) out += "row " + std::to_string(n.row) + ": " + n.reason + "\n";
  return out;
}

}  // namespace aquagauge::ingest
