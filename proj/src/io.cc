/*
 * Copyright 2026 The AlphaTree Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "alphatree/io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <boost/tokenizer.hpp>
#include <json.hpp>

#include "alphatree/errors.h"

namespace alphatree {
namespace {

using Json = nlohmann::ordered_json;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Json ParseJson(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(what + " is not valid JSON: " + e.what());
  }
}

void RejectUnknownKeys(const Json& object, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!object.is_object()) throw FormatError(where + " must be an object");
  for (const auto& [key, value] : object.items()) {
    if (!allowed.contains(key)) throw FormatError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T Required(const Json& object, const std::string& key, const std::string& where) {
  if (!object.contains(key)) throw FormatError(where + ": missing key '" + key + "'");
  try {
    return object.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw FormatError(where + ": bad value for '" + key + "': " + e.what());
  }
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  try {
    Tokenizer tokens(line, boost::escaped_list_separator<char>('\\', ',', '"'));
    return {tokens.begin(), tokens.end()};
  } catch (const boost::escaped_list_error& e) {
    throw FormatError(std::string("malformed CSV line: ") + e.what());
  }
}

double ParseNumber(const std::string& text, const std::string& where) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && *begin == ' ') ++begin;
  while (end > begin && end[-1] == ' ') --end;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || begin == end) {
    throw SchemaError(where + ": cannot parse '" + text + "' as a number");
  }
  return value;
}

FeatureKind ParseKind(const std::string& kind, const std::string& where) {
  if (kind == "numeric") return FeatureKind::kNumeric;
  if (kind == "categorical") return FeatureKind::kCategorical;
  throw FormatError(where + ": feature kind must be numeric or categorical");
}

Json TestToJson(const SplitTest& test) {
  Json split;
  split["feature"] = test.feature;
  if (test.kind == SplitTest::Kind::kNumeric) {
    split["kind"] = "numeric";
    split["threshold"] = test.threshold;
  } else {
    split["kind"] = "categorical";
    split["modality"] = test.modality;
  }
  return split;
}

Json NodeToJson(const AlphaTree& tree, int index) {
  Json node;
  if (const auto* leaf = std::get_if<Leaf>(&tree.node(index))) {
    if (!std::isfinite(leaf->alpha)) {
      throw DomainError("leaf " + std::to_string(leaf->id) + " has a non-finite alpha");
    }
    node["leaf"] = {{"id", leaf->id}, {"alpha", leaf->alpha}, {"edge", leaf->edge},
                    {"mass", leaf->mass}};
    return node;
  }
  const auto& internal = std::get<InternalNode>(tree.node(index));
  node["split"] = TestToJson(internal.test);
  node["left"] = NodeToJson(tree, internal.left);
  node["right"] = NodeToJson(tree, internal.right);
  return node;
}

int NodeFromJson(const Json& json, std::vector<TreeNode>& nodes, int depth) {
  if (depth > 10000) throw FormatError("tree is too deep");
  if (!json.is_object()) throw FormatError("tree node must be an object");
  const int index = static_cast<int>(nodes.size());
  if (json.contains("leaf")) {
    RejectUnknownKeys(json, {"leaf"}, "leaf node");
    const Json& body = json.at("leaf");
    RejectUnknownKeys(body, {"id", "alpha", "edge", "mass"}, "leaf");
    Leaf leaf;
    leaf.id = Required<int>(body, "id", "leaf");
    leaf.alpha = Required<double>(body, "alpha", "leaf");
    leaf.edge = Required<double>(body, "edge", "leaf");
    leaf.mass = Required<double>(body, "mass", "leaf");
    nodes.emplace_back(leaf);
    return index;
  }
  RejectUnknownKeys(json, {"split", "left", "right"}, "split node");
  const Json& split = json.contains("split") ? json.at("split") : Json();
  RejectUnknownKeys(split, {"feature", "kind", "threshold", "modality"}, "split");
  InternalNode internal;
  const std::string feature = Required<std::string>(split, "feature", "split");
  const std::string kind = Required<std::string>(split, "kind", "split");
  if (kind == "numeric") {
    internal.test = SplitTest::Numeric(feature, Required<double>(split, "threshold", "split"));
  } else if (kind == "categorical") {
    internal.test =
        SplitTest::Categorical(feature, Required<std::string>(split, "modality", "split"));
  } else {
    throw FormatError("split kind must be numeric or categorical");
  }
  if (!json.contains("left") || !json.contains("right")) {
    throw FormatError("split node needs both children");
  }
  nodes.emplace_back(internal);
  const int left = NodeFromJson(json.at("left"), nodes, depth + 1);
  const int right = NodeFromJson(json.at("right"), nodes, depth + 1);
  auto& stored = std::get<InternalNode>(nodes[index]);
  stored.left = left;
  stored.right = right;
  return index;
}

Json GaussianToJson(const GaussianPlugin& model) {
  Json out;
  out["prior_positive"] = model.prior_positive();
  Json numeric = Json::array();
  for (const auto& p : model.numeric()) {
    numeric.push_back({{"feature", p.feature},
                       {"mean", {p.mean[0], p.mean[1]}},
                       {"variance", {p.variance[0], p.variance[1]}}});
  }
  out["numeric"] = numeric;
  Json categorical = Json::array();
  for (const auto& p : model.categorical()) {
    categorical.push_back({{"feature", p.feature},
                           {"domain", p.domain},
                           {"counts", {p.counts[0], p.counts[1]}},
                           {"totals", {p.totals[0], p.totals[1]}}});
  }
  out["categorical"] = categorical;
  return out;
}

GaussianPlugin GaussianFromJson(const Json& json) {
  RejectUnknownKeys(json, {"prior_positive", "numeric", "categorical"}, "gaussian");
  std::vector<GaussianPlugin::NumericParams> numeric;
  for (const Json& item : Required<Json>(json, "numeric", "gaussian")) {
    RejectUnknownKeys(item, {"feature", "mean", "variance"}, "gaussian numeric");
    GaussianPlugin::NumericParams p;
    p.feature = Required<std::string>(item, "feature", "gaussian numeric");
    const auto mean = Required<std::vector<double>>(item, "mean", "gaussian numeric");
    const auto var = Required<std::vector<double>>(item, "variance", "gaussian numeric");
    if (mean.size() != 2 || var.size() != 2) throw FormatError("gaussian needs 2 classes");
    p.mean[0] = mean[0];
    p.mean[1] = mean[1];
    p.variance[0] = var[0];
    p.variance[1] = var[1];
    numeric.push_back(std::move(p));
  }
  std::vector<GaussianPlugin::CategoricalParams> categorical;
  for (const Json& item : Required<Json>(json, "categorical", "gaussian")) {
    RejectUnknownKeys(item, {"feature", "domain", "counts", "totals"}, "gaussian categorical");
    GaussianPlugin::CategoricalParams p;
    p.feature = Required<std::string>(item, "feature", "gaussian categorical");
    p.domain = Required<std::vector<std::string>>(item, "domain", "gaussian categorical");
    const auto counts =
        Required<std::vector<std::vector<double>>>(item, "counts", "gaussian categorical");
    const auto totals = Required<std::vector<double>>(item, "totals", "gaussian categorical");
    if (counts.size() != 2 || totals.size() != 2 || counts[0].size() != p.domain.size() ||
        counts[1].size() != p.domain.size()) {
      throw FormatError("gaussian categorical counts do not match the domain");
    }
    p.counts[0] = counts[0];
    p.counts[1] = counts[1];
    p.totals[0] = totals[0];
    p.totals[1] = totals[1];
    categorical.push_back(std::move(p));
  }
  try {
    return GaussianPlugin::FromParams(Required<double>(json, "prior_positive", "gaussian"),
                                      std::move(numeric), std::move(categorical));
  } catch (const DomainError& e) {
    throw FormatError(std::string("gaussian: ") + e.what());
  }
}

}  // namespace

SchemaConfig SchemaConfig::FromJson(const std::string& text) {
  const Json json = ParseJson(text, "schema");
  RejectUnknownKeys(json,
                    {"label_column", "label_map", "group_column", "score_column",
                     "target_column", "weight_column", "features", "clip_B"},
                    "schema");
  SchemaConfig schema;
  schema.label_column = Required<std::string>(json, "label_column", "schema");
  schema.group_column = Required<std::string>(json, "group_column", "schema");
  schema.score_column = Required<std::string>(json, "score_column", "schema");
  if (json.contains("label_map")) {
    schema.label_map = Required<std::map<std::string, int>>(json, "label_map", "schema");
    for (const auto& [raw, label] : schema.label_map) {
      if (label != 1 && label != -1) {
        throw FormatError("schema: label_map values must be +1 or -1");
      }
    }
  }
  if (json.contains("target_column")) {
    schema.target_column = Required<std::string>(json, "target_column", "schema");
  }
  if (json.contains("weight_column")) {
    schema.weight_column = Required<std::string>(json, "weight_column", "schema");
  }
  if (json.contains("clip_B")) schema.clip_B = Required<double>(json, "clip_B", "schema");
  if (!(schema.clip_B > 0.0) || !std::isfinite(schema.clip_B)) {
    throw FormatError("schema: clip_B must be positive");
  }
  for (const Json& item : Required<Json>(json, "features", "schema")) {
    RejectUnknownKeys(item, {"name", "kind"}, "schema feature");
    schema.features.push_back(
        {Required<std::string>(item, "name", "schema feature"),
         ParseKind(Required<std::string>(item, "kind", "schema feature"), "schema feature")});
  }
  return schema;
}

SchemaConfig SchemaConfig::Load(const std::string& path) { return FromJson(ReadFile(path)); }

std::string SchemaConfig::ToJson() const {
  Json json;
  json["label_column"] = label_column;
  if (!label_map.empty()) json["label_map"] = label_map;
  json["group_column"] = group_column;
  json["score_column"] = score_column;
  if (target_column) json["target_column"] = *target_column;
  if (weight_column) json["weight_column"] = *weight_column;
  Json features_json = Json::array();
  for (const FeatureSpec& spec : features) {
    features_json.push_back(
        {{"name", spec.name},
         {"kind", spec.kind == FeatureKind::kNumeric ? "numeric" : "categorical"}});
  }
  json["features"] = features_json;
  json["clip_B"] = clip_B;
  return json.dump(2);
}

int SchemaConfig::MapLabel(const std::string& raw) const {
  if (label_map.empty()) {
    if (raw == "1" || raw == "+1") return 1;
    if (raw == "0" || raw == "-1") return -1;
  } else if (auto it = label_map.find(raw); it != label_map.end()) {
    return it->second;
  }
  throw SchemaError("label value '" + raw + "' is not mapped");
}

Dataset LoadDataset(std::istream& in, const SchemaConfig& schema) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("dataset has no header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = SplitCsvLine(line);
  auto find = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw SchemaError("missing column '" + name + "'");
    return static_cast<int>(it - header.begin());
  };
  const int label_col = find(schema.label_column);
  const int group_col = find(schema.group_column);
  const int score_col = find(schema.score_column);
  const int target_col = schema.target_column ? find(*schema.target_column) : -1;
  const int weight_col = schema.weight_column ? find(*schema.weight_column) : -1;
  std::vector<int> feature_cols;
  for (const FeatureSpec& spec : schema.features) feature_cols.push_back(find(spec.name));

  DatasetBuilder builder(schema.features, schema.group_column, ClipBound(schema.clip_B));
  int row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const std::string where = "row " + std::to_string(row);
    std::vector<std::string> cells;
    try {
      cells = SplitCsvLine(line);
    } catch (const FormatError& e) {
      throw FormatError(where + ": " + e.what());
    }
    if (cells.size() != header.size()) {
      throw SchemaError(where + ": expected " + std::to_string(header.size()) +
                        " cells, got " + std::to_string(cells.size()));
    }
    int label = 0;
    try {
      label = schema.MapLabel(cells[label_col]);
    } catch (const SchemaError& e) {
      throw SchemaError(where + ": " + e.what());
    }
    std::vector<MapRecord::Value> features;
    for (size_t j = 0; j < schema.features.size(); ++j) {
      const std::string& cell = cells[feature_cols[j]];
      if (schema.features[j].kind == FeatureKind::kNumeric) {
        features.emplace_back(ParseNumber(cell, where + ", column '" + schema.features[j].name + "'"));
      } else {
        features.emplace_back(cell);
      }
    }
    const double score = ParseNumber(cells[score_col], where + ", column '" + schema.score_column + "'");
    const double weight =
        weight_col < 0 ? 1.0 : ParseNumber(cells[weight_col], where + ", weight column");
    std::optional<double> target;
    if (target_col >= 0) target = ParseNumber(cells[target_col], where + ", target column");
    builder.AddRow(features, label, cells[group_col], score, weight, target);
  }
  return std::move(builder).Build();
}

Dataset LoadDataset(const std::string& path, const SchemaConfig& schema) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return LoadDataset(in, schema);
}

std::string ScoringName(Scoring scoring) {
  return scoring == Scoring::kConservative ? "conservative" : "audacious";
}

Scoring ParseScoring(const std::string& name) {
  if (name == "conservative") return Scoring::kConservative;
  if (name == "audacious") return Scoring::kAudacious;
  throw ConfigError("scoring must be conservative or audacious, got '" + name + "'");
}

std::string ModelToJson(const AlphaTree& tree, const ModelMeta& meta) {
  Json json;
  json["format_version"] = kModelFormatVersion;
  json["clip_B"] = meta.clip_B;
  json["scoring"] = ScoringName(meta.scoring);
  json["group_column"] = meta.group_column;
  json["tree"] = NodeToJson(tree, tree.root());
  json["provenance"] = {{"strategy", meta.strategy},
                        {"config_digest", meta.config_digest},
                        {"iterations", meta.iterations}};
  if (meta.gaussian) json["gaussian"] = GaussianToJson(*meta.gaussian);
  if (meta.schema) json["schema"] = Json::parse(meta.schema->ToJson());
  return json.dump(2) + "\n";
}

Model ModelFromJson(const std::string& text) {
  const Json json = ParseJson(text, "model file");
  if (!json.is_object()) throw FormatError("model file must be an object");
  const int version = Required<int>(json, "format_version", "model");
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model format_version " + std::to_string(version));
  }
  RejectUnknownKeys(json,
                    {"format_version", "clip_B", "scoring", "group_column", "tree",
                     "provenance", "gaussian", "schema"},
                    "model");
  ModelMeta meta;
  meta.clip_B = Required<double>(json, "clip_B", "model");
  if (!(meta.clip_B > 0.0) || !std::isfinite(meta.clip_B)) {
    throw FormatError("model: clip_B must be positive");
  }
  try {
    meta.scoring = ParseScoring(Required<std::string>(json, "scoring", "model"));
  } catch (const ConfigError& e) {
    throw FormatError(e.what());
  }
  meta.group_column = Required<std::string>(json, "group_column", "model");
  const Json provenance = Required<Json>(json, "provenance", "model");
  RejectUnknownKeys(provenance, {"strategy", "config_digest", "iterations"}, "provenance");
  meta.strategy = Required<std::string>(provenance, "strategy", "provenance");
  meta.config_digest = Required<std::string>(provenance, "config_digest", "provenance");
  meta.iterations = Required<int>(provenance, "iterations", "provenance");
  if (json.contains("gaussian")) meta.gaussian = GaussianFromJson(json.at("gaussian"));
  if (json.contains("schema")) meta.schema = SchemaConfig::FromJson(json.at("schema").dump());

  std::vector<TreeNode> nodes;
  if (!json.contains("tree")) throw FormatError("model: missing key 'tree'");
  NodeFromJson(json.at("tree"), nodes, 0);
  return {AlphaTree::FromNodes(std::move(nodes), 0), std::move(meta)};
}

void SaveModel(const AlphaTree& tree, const ModelMeta& meta, const std::string& path) {
  const std::string text = ModelToJson(tree, meta);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out << text;
  if (!out) throw FormatError("failed writing '" + path + "'");
}

Model LoadModel(const std::string& path) { return ModelFromJson(ReadFile(path)); }

std::string Fnv1aDigest(const std::string& text) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << hash;
  return out.str();
}

void SplitPlan::Validate() const {
  if (folds < 2) throw ConfigError("split plan needs at least 2 folds");
  if (!(blackbox >= 0.0 && postprocess >= 0.0 && test > 0.0)) {
    throw ConfigError("split fractions must be nonnegative");
  }
  if (std::abs(blackbox + postprocess + test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
  if (std::abs(test * folds - 1.0) > 1e-9) {
    throw ConfigError("test fraction must equal 1 / folds so the folds partition the rows");
  }
}

FoldAssignment MakeSplitPlan(const Dataset& dataset, const SplitPlan& plan) {
  plan.Validate();
  const Grouping& groups = dataset.groups();
  std::mt19937_64 engine(plan.seed);
  FoldAssignment out;

  // Test folds go round-robin through each shuffled group; the starting fold
  // rotates so fold sizes stay within one row. Positions in [0, 1) spread
  // each group evenly so that sorting by position interleaves the groups.
  const int n = dataset.num_rows();
  out.test_fold.assign(n, 0);
  std::vector<std::vector<int>> members(groups.num_groups());
  for (int row = 0; row < n; ++row) members[groups.codes[row]].push_back(row);
  std::vector<std::pair<double, int>> positions;
  int offset = 0;
  for (int g = 0; g < groups.num_groups(); ++g) {
    std::vector<int>& rows = members[g];
    if (static_cast<int>(rows.size()) < plan.folds) {
      out.warnings.push_back("group '" + groups.names[g] + "' has fewer rows than folds");
    }
    std::shuffle(rows.begin(), rows.end(), engine);
    for (size_t k = 0; k < rows.size(); ++k) {
      out.test_fold[rows[k]] = static_cast<int>((offset + k) % plan.folds);
      positions.emplace_back((k + 0.5) / rows.size(), rows[k]);
    }
    offset = static_cast<int>((offset + rows.size()) % plan.folds);
  }
  std::sort(positions.begin(), positions.end());

  out.roles.assign(plan.folds, std::vector<FoldRole>(n, FoldRole::kTest));
  const double train = plan.blackbox + plan.postprocess;
  for (int fold = 0; fold < plan.folds; ++fold) {
    std::vector<int> rest;
    for (const auto& [position, row] : positions) {
      if (out.test_fold[row] != fold) rest.push_back(row);
    }
    // Largest remainder between the two training parts.
    const double exact = train > 0.0 ? rest.size() * plan.blackbox / train : 0.0;
    int blackbox_count = static_cast<int>(std::floor(exact));
    const double other = rest.size() - exact;
    if (exact - blackbox_count > other - std::floor(other) &&
        blackbox_count < static_cast<int>(rest.size())) {
      ++blackbox_count;
    } else if (blackbox_count + static_cast<int>(std::floor(other)) <
               static_cast<int>(rest.size()) &&
               exact - blackbox_count == other - std::floor(other) && exact > 0.0) {
      ++blackbox_count;  // tie: the first part takes the extra row
    }
    const int m = static_cast<int>(rest.size());
    for (int i = 0; i < m; ++i) {
      const bool is_blackbox =
          static_cast<long long>(i + 1) * blackbox_count / m >
          static_cast<long long>(i) * blackbox_count / m;
      out.roles[fold][rest[i]] = is_blackbox ? FoldRole::kBlackbox : FoldRole::kPostprocess;
    }
  }
  return out;
}

std::string RoleName(FoldRole role) {
  switch (role) {
    case FoldRole::kBlackbox:
      return "blackbox";
    case FoldRole::kPostprocess:
      return "postprocess";
    case FoldRole::kTest:
      return "test";
  }
  return "test";
}

void WriteSplitPlan(const FoldAssignment& assignment, std::ostream& out) {
  out << "row,test_fold";
  for (size_t fold = 0; fold < assignment.roles.size(); ++fold) out << ",fold" << fold;
  out << '\n';
  for (size_t row = 0; row < assignment.test_fold.size(); ++row) {
    out << row << ',' << assignment.test_fold[row];
    for (const auto& roles : assignment.roles) out << ',' << RoleName(roles[row]);
    out << '\n';
  }
}

}  // namespace alphatree
