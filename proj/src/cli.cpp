#include "aquagauge/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "aquagauge/csv.hpp"
#include "aquagauge/forecast.hpp"
#include "aquagauge/gbm.hpp"
#include "aquagauge/ingest.hpp"
#include "aquagauge/model_io.hpp"
#include "aquagauge/rules.hpp"
#include "aquagauge/wqi.hpp"

namespace aquagauge::cli {
namespace {

// Raised for bad user input that is not tied to a module error.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;
  std::string input;
  std::string mode = "normative";
  std::string impute = "drop";
  bool strict = false;
  std::uint64_t seed = 0;
  std::string rules;
  std::string model;
  std::string out;
  std::string eval;
  std::string split = "station";
  double test_fraction = 0.2;
  gbm::Hyperparams hp;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Temp file + rename so readers never see a half-written output.
void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write '" + path + "'");
    out << content;
    out.flush();
    if (!out) throw UsageError("failed writing '" + path + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw UsageError("cannot move output into place at '" + path + "': " + ec.message());
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
  } else {
    write_file_atomic(path, content);
  }
}

wqi::Mode mode_of(const RunConfig& cfg) {
  return cfg.mode == "legacy-nco" ? wqi::Mode::legacy_nco : wqi::Mode::normative;
}

void echo_config(const RunConfig& c, std::ostream& err) {
  err << "config: subcommand=" << c.subcommand << " input=" << c.input << " mode=" << c.mode
      << " impute=" << c.impute << " strict=" << (c.strict ? "true" : "false") << " seed=" << c.seed
      << " rules=" << (c.rules.empty() ? "<default>" : c.rules) << " model=" << c.model << " out=" << c.out
      << " eval=" << c.eval << " split=" << c.split << " test_fraction=" << csv::format_shortest(c.test_fraction)
      << " n_trees=" << c.hp.n_trees << " learning_rate=" << csv::format_shortest(c.hp.learning_rate)
      << " max_depth=" << c.hp.max_depth << " min_samples_split=" << c.hp.min_samples_split
      << " min_samples_leaf=" << c.hp.min_samples_leaf << "\n";
}

ingest::Dataset load_dataset(const RunConfig& cfg, std::ostream& err) {
  const std::string text = read_file(cfg.input);
  auto ds = ingest::parse_dataset(text, cfg.strict ? ingest::Strictness::strict : ingest::Strictness::lenient,
                                  cfg.input);
  ds = ingest::impute_missing(std::move(ds), cfg.impute == "median" ? ingest::ImputePolicy::median
                                                                    : ingest::ImputePolicy::drop_row);
  err << ingest::format_row_log(ds.provenance);
  if (ds.samples.empty()) throw UsageError("no samples");
  return ds;
}

gbm::GbmModel load_model(const std::string& path) { return gbm::deserialize_model(read_file(path)); }

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required option ") + flag);
}

int cmd_wqi(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto ds = load_dataset(cfg, err);
  const auto records = wqi::compute_wqi_batch(ds.samples, mode_of(cfg));
  std::string text = "station,month_year,nph,ndo,nbdo,nec,nna,nco,wph,wdo,wbdo,wec,wna,wco,wqi\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& s = ds.samples[i];
    const auto& r = records[i];
    const auto f2 = [](double v) { return csv::format_fixed(v, 2); };
    text += csv::join({s.station_code, ingest::format_month_year(s.month, s.year), std::to_string(r.sub.nph),
                       std::to_string(r.sub.ndo), std::to_string(r.sub.nbdo), std::to_string(r.sub.nec),
                       std::to_string(r.sub.nna), std::to_string(r.sub.nco), f2(r.weighted.wph),
                       f2(r.weighted.wdo), f2(r.weighted.wbdo), f2(r.weighted.wec), f2(r.weighted.wna),
                       f2(r.weighted.wco), f2(r.wqi)});
    text += "\n";
  }
  emit(cfg.out, text, out);
  return kExitOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require(cfg.model, "--model");
  const auto ds = load_dataset(cfg, err);
  const auto task = forecast::build_supervised(ds, mode_of(cfg));
  if (task.targets.empty()) throw UsageError("empty training task: need >= 2 observations for some station");
  auto [train, held_out] = forecast::split_by_station(task, cfg.test_fraction, cfg.seed);

  const auto model = gbm::gbm_fit(train.features, train.targets, cfg.hp);
  write_file_atomic(cfg.model, gbm::serialize_model(model));
  write_file_atomic(cfg.out.empty() ? cfg.model + ".curve.csv" : cfg.out,
                    forecast::training_curve_csv(model.training_curve));
  out << "examples train=" << train.targets.size() << " held_out=" << held_out.targets.size() << "\n";
  out << "final_training_loss=" << csv::format_shortest(model.training_curve.back()) << "\n";
  return kExitOk;
}

int cmd_predict(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require(cfg.model, "--model");
  const auto model = load_model(cfg.model);
  const auto ds = load_dataset(cfg, err);
  const auto table = forecast::build_features(ds, mode_of(cfg));
  if (model.feature_names != table.features.feature_names()) {
    throw forecast::EvalError(forecast::EvalErrorKind::feature_mismatch,
                              "model features do not match the forecasting feature set");
  }
  const auto predicted = gbm::gbm_predict_batch(model, table.features);
  std::string text = "station,month_year,wqi,predicted_wqi\n";
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& k = table.keys[i];
    text += csv::join({k.station_code, ingest::format_month_year(k.month, k.year),
                       csv::format_fixed(table.current_wqi[i], 6), csv::format_fixed(predicted[i], 6)});
    text += "\n";
  }
  emit(cfg.out, text, out);
  return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require(cfg.model, "--model");
  require(cfg.out, "--out");
  const auto model = load_model(cfg.model);
  const auto ds = load_dataset(cfg, err);
  auto task = forecast::build_supervised(ds, mode_of(cfg));
  if (cfg.split == "station") task = forecast::split_by_station(task, cfg.test_fraction, cfg.seed).second;
  if (task.targets.empty()) throw UsageError("no examples to evaluate");
  const auto report = forecast::evaluate(model, task);
  write_file_atomic(cfg.out, forecast::eval_report_csv(report));
  out << forecast::format_summary(report) << "\n";
  return kExitOk;
}

int cmd_diagnose(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const rules::RuleSet rs = cfg.rules.empty() ? rules::default_ruleset() : rules::load_rules(read_file(cfg.rules));
  const auto ds = load_dataset(cfg, err);
  const auto records = wqi::compute_wqi_batch(ds.samples, mode_of(cfg));
  std::string text = "station,month_year,wqi,disease,suggestion\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& s = ds.samples[i];
    const auto d = rules::diagnose(records[i], rs);
    text += csv::join({s.station_code, ingest::format_month_year(s.month, s.year),
                       csv::format_fixed(records[i].wqi, 2), d.disease, d.suggestion});
    text += "\n";
  }
  emit(cfg.out, text, out);
  return kExitOk;
}

int cmd_plot_data(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  if (cfg.model.empty() && cfg.eval.empty()) throw UsageError("nothing to plot: pass --model and/or --eval");
  require(cfg.out, "--out");
  if (!cfg.model.empty()) {
    const auto model = load_model(cfg.model);
    if (model.training_curve.empty()) throw UsageError("model has no training curve");
    const std::string path = cfg.out + "_loss.csv";
    write_file_atomic(path, forecast::training_curve_csv(model.training_curve));
    out << "wrote " << path << "\n";
  }
  if (!cfg.eval.empty()) {
    const auto rows = csv::parse(read_file(cfg.eval));
    if (rows.size() < 2) throw UsageError("evaluation file '" + cfg.eval + "' has no rows");
    const auto& header = rows.front();
    const auto col = [&](std::string_view name) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) throw UsageError("evaluation file lacks column '" + std::string(name) + "'");
      return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t a = col("actual");
    const std::size_t p = col("predicted");
    std::string text = "actual,predicted\n";
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() != header.size()) throw UsageError("evaluation file row " + std::to_string(i) + " is malformed");
      text += rows[i][a] + "," + rows[i][p] + "\n";
    }
    const std::string path = cfg.out + "_scatter.csv";
    write_file_atomic(path, text);
    out << "wrote " << path << "\n";
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Water quality index, WQI forecasting and fish-disease diagnosis", "aquagauge"};
  app.require_subcommand(1, 1);

  const auto add_common = [&](CLI::App* sub, bool needs_input) {
    auto* in = sub->add_option("--input", cfg.input, "Monitoring-station CSV");
    if (needs_input) in->required();
    auto* mode = sub->add_option("--mode", cfg.mode, "WQI coliform scoring: normative or legacy-nco")
                     ->check(CLI::IsMember({"normative", "legacy-nco"}));
    sub->add_flag_callback("--legacy-nco", [&] { cfg.mode = "legacy-nco"; }, "Same as --mode legacy-nco")
        ->excludes(mode);
    sub->add_option("--impute", cfg.impute, "Missing WQI inputs: drop or median")
        ->check(CLI::IsMember({"drop", "median"}));
    sub->add_flag("--strict", cfg.strict, "Reject any unparseable cell instead of treating it as missing");
    sub->add_option("--seed", cfg.seed, "Seed for the station split");
    sub->add_option("--out", cfg.out, "Output path");
  };

  auto* wqi_cmd = app.add_subcommand("wqi", "Sub-indices, weighted scores and WQI per sample");
  add_common(wqi_cmd, true);

  auto* train_cmd = app.add_subcommand("train", "Fit the 4-month WQI forecaster");
  add_common(train_cmd, true);
  train_cmd->add_option("--model", cfg.model, "Model file to write")->required();
  train_cmd->add_option("--test-fraction", cfg.test_fraction, "Share of stations held out");
  train_cmd->add_option("--n-trees", cfg.hp.n_trees);
  train_cmd->add_option("--learning-rate", cfg.hp.learning_rate);
  train_cmd->add_option("--max-depth", cfg.hp.max_depth);
  train_cmd->add_option("--min-samples-split", cfg.hp.min_samples_split);
  train_cmd->add_option("--min-samples-leaf", cfg.hp.min_samples_leaf);

  auto* predict_cmd = app.add_subcommand("predict", "Predict WQI 4 months ahead for every observation");
  add_common(predict_cmd, true);
  predict_cmd->add_option("--model", cfg.model, "Model file")->required();

  auto* eval_cmd = app.add_subcommand("evaluate", "MSE, R² and percentile error on held-out stations");
  add_common(eval_cmd, true);
  eval_cmd->add_option("--model", cfg.model, "Model file")->required();
  eval_cmd->add_option("--split", cfg.split, "station (held-out stations) or all")
      ->check(CLI::IsMember({"station", "all"}));
  eval_cmd->add_option("--test-fraction", cfg.test_fraction, "Share of stations held out");

  auto* diag_cmd = app.add_subcommand("diagnose", "Disease and suggestion per sample");
  add_common(diag_cmd, true);
  diag_cmd->add_option("--rules", cfg.rules, "Rules file (default: built-in ruleset)");

  auto* plot_cmd = app.add_subcommand("plot-data", "Loss-curve and actual-vs-predicted CSVs");
  plot_cmd->add_option("--model", cfg.model, "Model file (loss curve)");
  plot_cmd->add_option("--eval", cfg.eval, "Per-example CSV from evaluate (scatter)");
  plot_cmd->add_option("--out", cfg.out, "Output prefix");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitDataError;
  }

  cfg.subcommand = app.get_subcommands().front()->get_name();
  cfg.hp.seed = cfg.seed;
  echo_config(cfg, err);

  try {
    if (!(cfg.test_fraction >= 0.0 && cfg.test_fraction < 1.0)) throw UsageError("--test-fraction must be in [0, 1)");
    if (cfg.subcommand == "wqi") return cmd_wqi(cfg, out, err);
    if (cfg.subcommand == "train") return cmd_train(cfg, out, err);
    if (cfg.subcommand == "predict") return cmd_predict(cfg, out, err);
    if (cfg.subcommand == "evaluate") return cmd_evaluate(cfg, out, err);
    if (cfg.subcommand == "diagnose") return cmd_diagnose(cfg, out, err);
    if (cfg.subcommand == "plot-data") return cmd_plot_data(cfg, out, err);
    throw UsageError("unknown subcommand " + cfg.subcommand);
  } catch (const std::logic_error& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
}

}  // namespace aquagauge::cli
