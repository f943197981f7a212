#include "aquagauge/model_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "aquagauge/csv.hpp"

namespace aquagauge::gbm {
namespace {

using Kind = ModelFormatErrorKind;

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ') ++i;
    if (i > start) words.push_back(line.substr(start, i - start));
  }
  return words;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  if (s.empty()) return parts;
  while (true) {
    const auto pos = s.find(sep);
    parts.push_back(s.substr(0, pos));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return parts;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) return std::nullopt;
  }
  return v;
}

std::string num(double v) { return csv::format_general(v, 17); }

std::size_t fill_counts(std::vector<TreeNode>& nodes, int i) {
  TreeNode& n = nodes[i];
  if (n.is_leaf) return n.train_count;
  const std::size_t total = fill_counts(nodes, n.left) + fill_counts(nodes, n.right);
  nodes[i].train_count = total;
  return total;
}

}  // namespace

std::string serialize_model(const GbmModel& model) {
  for (const auto& name : model.feature_names) {
    if (name.empty() || name.find_first_of(",\r\n") != std::string::npos) {
      throw ModelFormatError(Kind::corrupt_header, "feature name '" + name + "' cannot be serialized");
    }
  }
  const Hyperparams& hp = model.hyperparams;
  std::string out;
  out += std::string(kModelMagic) + "\n";
  out += "version " + std::to_string(kModelFormatVersion) + "\n";
  out += "loss=squared_error\n";
  out += "n_trees=" + std::to_string(hp.n_trees) + "\n";
  out += "learning_rate=" + num(hp.learning_rate) + "\n";
  out += "max_depth=" + std::to_string(hp.max_depth) + "\n";
  out += "min_samples_split=" + std::to_string(hp.min_samples_split) + "\n";
  out += "min_samples_leaf=" + std::to_string(hp.min_samples_leaf) + "\n";
  out += "seed=" + std::to_string(hp.seed) + "\n";
  out += "f0=" + num(model.f0) + "\n";
  out += "feature_names=";
  for (std::size_t i = 0; i < model.feature_names.size(); ++i) {
    if (i) out += ",";
    out += model.feature_names[i];
  }
  out += "\ntraining_curve=";
  for (std::size_t i = 0; i < model.training_curve.size(); ++i) {
    if (i) out += ",";
    out += num(model.training_curve[i]);
  }
  out += "\n";
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const auto& nodes = model.trees[t].nodes();
    out += "tree " + std::to_string(t) + " nodes " + std::to_string(nodes.size()) + "\n";
    for (const auto& n : nodes) {
      if (n.is_leaf) {
        out += "L " + num(n.value) + " " + std::to_string(n.train_count) + "\n";
      } else {
        out += "I " + std::to_string(n.feature) + " " + num(n.threshold) + " " + std::to_string(n.left) +
               " " + std::to_string(n.right) + "\n";
      }
    }
  }
  out += "end\n";
  return out;
}

GbmModel deserialize_model(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != kModelMagic) {
    throw ModelFormatError(Kind::bad_magic, "not a model file (missing " + std::string(kModelMagic) + ")");
  }
  if (lines.size() < 2) throw ModelFormatError(Kind::corrupt_header, "missing version line");
  {
    const auto w = split_words(lines[1]);
    const auto v = w.size() == 2 && w[0] == "version" ? parse_number<int>(w[1]) : std::nullopt;
    if (!v) throw ModelFormatError(Kind::corrupt_header, "malformed version line");
    if (*v != kModelFormatVersion) {
      throw ModelFormatError(Kind::unsupported_version, "unsupported model version " + std::string(w[1]));
    }
  }

  std::size_t i = 2;
  std::map<std::string, std::string_view, std::less<>> header;
  for (; i < lines.size() && !lines[i].starts_with("tree ") && lines[i] != "end"; ++i) {
    const auto eq = lines[i].find('=');
    if (eq == std::string_view::npos) {
      throw ModelFormatError(Kind::corrupt_header, "malformed header line " + std::to_string(i + 1));
    }
    header.emplace(std::string(lines[i].substr(0, eq)), lines[i].substr(eq + 1));
  }

  auto field = [&](const char* key) -> std::string_view {
    auto it = header.find(key);
    if (it == header.end()) throw ModelFormatError(Kind::corrupt_header, std::string("missing header key ") + key);
    return it->second;
  };
  auto bad = [](const char* key) { return ModelFormatError(Kind::corrupt_header, std::string("bad value for ") + key); };
  auto integer = [&](const char* key) {
    auto v = parse_number<int>(field(key));
    if (!v) throw bad(key);
    return *v;
  };
  auto real = [&](const char* key) {
    auto v = parse_number<double>(field(key));
    if (!v) throw bad(key);
    return *v;
  };

  for (const auto& [key, value] : header) {
    static const char* const kKnown[] = {"loss", "n_trees", "learning_rate", "max_depth", "min_samples_split",
                                         "min_samples_leaf", "seed", "f0", "feature_names", "training_curve"};
    if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
      throw ModelFormatError(Kind::corrupt_header, "unknown header key " + key);
    }
  }

  GbmModel model;
  if (field("loss") != "squared_error") throw bad("loss");
  model.hyperparams.n_trees = integer("n_trees");
  model.hyperparams.learning_rate = real("learning_rate");
  model.hyperparams.max_depth = integer("max_depth");
  model.hyperparams.min_samples_split = integer("min_samples_split");
  model.hyperparams.min_samples_leaf = integer("min_samples_leaf");
  {
    auto seed = parse_number<std::uint64_t>(field("seed"));
    if (!seed) throw bad("seed");
    model.hyperparams.seed = *seed;
  }
  try {
    model.hyperparams.validate();
  } catch (const GbmError& e) {
    throw ModelFormatError(Kind::corrupt_header, e.what());
  }
  model.f0 = real("f0");
  for (auto name : split_on(field("feature_names"), ',')) {
    if (name.empty()) throw bad("feature_names");
    model.feature_names.emplace_back(name);
  }
  model.n_features = model.feature_names.size();
  for (auto v : split_on(field("training_curve"), ',')) {
    auto d = parse_number<double>(v);
    if (!d) throw bad("training_curve");
    model.training_curve.push_back(*d);
  }

  std::size_t node_base = 0;
  for (; i < lines.size() && lines[i] != "end"; ++i) {
    const auto w = split_words(lines[i]);
    const std::size_t t = model.trees.size();
    auto k = w.size() == 4 && w[0] == "tree" && w[2] == "nodes" ? parse_number<std::size_t>(w[3]) : std::nullopt;
    auto idx = w.size() == 4 ? parse_number<std::size_t>(w[1]) : std::nullopt;
    if (!k || !idx || *idx != t || *k == 0) {
      throw ModelFormatError(Kind::corrupt_node, "malformed tree header at line " + std::to_string(i + 1));
    }
    std::vector<TreeNode> nodes;
    nodes.reserve(*k);
    for (std::size_t j = 0; j < *k; ++j) {
      ++i;
      auto corrupt = [&]() {
        return ModelFormatError(Kind::corrupt_node, "corrupt node " + std::to_string(node_base + j) + " (tree " +
                                                        std::to_string(t) + ", node " + std::to_string(j) + ")");
      };
      if (i >= lines.size()) throw corrupt();
      const auto nw = split_words(lines[i]);
      TreeNode n;
      if (nw.size() == 3 && nw[0] == "L") {
        auto value = parse_number<double>(nw[1]);
        auto count = parse_number<std::size_t>(nw[2]);
        if (!value || !count) throw corrupt();
        n.value = *value;
        n.train_count = *count;
      } else if (nw.size() == 5 && nw[0] == "I") {
        auto f = parse_number<int>(nw[1]);
        auto thr = parse_number<double>(nw[2]);
        auto l = parse_number<int>(nw[3]);
        auto r = parse_number<int>(nw[4]);
        if (!f || !thr || !l || !r) throw corrupt();
        n.is_leaf = false;
        n.feature = *f;
        n.threshold = *thr;
        n.left = *l;
        n.right = *r;
      } else {
        throw corrupt();
      }
      nodes.push_back(n);
    }
    RegressionTree tree(nodes);
    if (auto err = tree.structural_error(model.n_features)) {
      throw ModelFormatError(Kind::corrupt_node, "tree " + std::to_string(t) + ": " + *err);
    }
    fill_counts(nodes, 0);
    model.trees.emplace_back(std::move(nodes));
    node_base += *k;
  }
  if (i >= lines.size()) {
    throw ModelFormatError(Kind::corrupt_node, "truncated model: missing end marker after node " +
                                                   std::to_string(node_base));
  }
  for (++i; i < lines.size(); ++i) {
    if (!lines[i].empty()) throw ModelFormatError(Kind::corrupt_node, "trailing content after end marker");
  }

  if (model.trees.size() > static_cast<std::size_t>(model.hyperparams.n_trees)) {
    throw ModelFormatError(Kind::corrupt_header, "more trees than n_trees");
  }
  if (!model.training_curve.empty() && model.training_curve.size() != model.trees.size() + 1) {
    throw ModelFormatError(Kind::corrupt_header, "training curve length does not match tree count");
  }
  return model;
}

}  // namespace aquagauge::gbm
