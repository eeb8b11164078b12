#include "cle/learn/bundle.hpp"
#include "cle/hash.hpp"

#include <fstream>
#include <sstream>

namespace cle::learn {

using nlohmann::json;

namespace {

json params_json(const GbtParams& p) {
  return {{"n_estimators", p.n_estimators},
          {"learning_rate", p.learning_rate},
          {"max_depth", p.max_depth},
          {"min_samples_leaf", p.min_samples_leaf},
          {"loss", "squared_error"}};
}

GbtParams params_from(const json& j) {
  GbtParams p;
  p.n_estimators = j.at("n_estimators").get<int>();
  p.learning_rate = j.at("learning_rate").get<double>();
  p.max_depth = j.at("max_depth").get<int>();
  p.min_samples_leaf = j.value("min_samples_leaf", 1);
  if (j.value("loss", std::string("squared_error")) != "squared_error") throw BundleError("unsupported loss");
  return p;
}

json tree_json(const RegressionTree& tree) {
  json nodes = json::array();
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& n = tree.nodes[i];
    if (n.is_leaf()) {
      nodes.push_back({{"id", i}, {"leaf", n.value}});
    } else {
      nodes.push_back({{"id", i}, {"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
    }
  }
  return {{"nodes", std::move(nodes)}};
}

RegressionTree tree_from(const json& j, std::size_t n_features) {
  RegressionTree tree;
  const auto& nodes = j.at("nodes");
  tree.nodes.resize(nodes.size());
  for (const auto& node : nodes) {
    const auto id = node.at("id").get<std::size_t>();
    if (id >= tree.nodes.size()) throw BundleError("tree node id out of range");
    auto& n = tree.nodes[id];
    if (node.contains("leaf")) {
      n.value = node.at("leaf").get<double>();
      continue;
    }
    n.feature = node.at("feature").get<int>();
    n.threshold = node.at("threshold").get<double>();
    n.left = node.at("left").get<int>();
    n.right = node.at("right").get<int>();
    const auto size = static_cast<int>(tree.nodes.size());
    if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= n_features || n.left <= static_cast<int>(id) ||
        n.right <= static_cast<int>(id) || n.left >= size || n.right >= size) {
      throw BundleError("malformed split node " + std::to_string(id));
    }
  }
  if (tree.nodes.empty()) throw BundleError("empty tree");
  return tree;
}

json model_json(const GbtModel& m) {
  json trees = json::array();
  for (const auto& t : m.trees) trees.push_back(tree_json(t));
  return {{"base_prediction", m.base_prediction},
          {"n_features", m.n_features},
          {"params", params_json(m.params)},
          {"trees", std::move(trees)}};
}

GbtModel model_from(const json& j) {
  GbtModel m;
  m.base_prediction = j.at("base_prediction").get<double>();
  m.n_features = j.at("n_features").get<std::size_t>();
  m.params = params_from(j.at("params"));
  for (const auto& t : j.at("trees")) m.trees.push_back(tree_from(t, m.n_features));
  if (m.trees.size() != static_cast<std::size_t>(m.params.n_estimators)) {
    throw BundleError("tree count does not match n_estimators");
  }
  return m;
}

json provider_json(const embed::EmbeddingProviderSpec& s) {
  return {{"provider_id", s.provider_id}, {"dim", s.dim}, {"parameters", s.parameters}};
}

embed::EmbeddingProviderSpec provider_from(const json& j) {
  embed::EmbeddingProviderSpec s;
  s.provider_id = j.at("provider_id").get<std::string>();
  s.dim = j.at("dim").get<std::size_t>();
  s.parameters = j.value("parameters", std::map<std::string, std::string>{});
  return s;
}

json report_json(const EvaluationReport& r) {
  json dims = json::object();
  for (const auto& [d, rep] : r.dimensions) {
    dims[std::string(to_string(d))] = {{"pearson_r", rep.pearson_r}, {"p_value", rep.p_value}, {"n_test", rep.n_test},
                                       {"n_train", rep.n_train}, {"cv_score", rep.cv_score}};
  }
  return {{"dimensions", std::move(dims)},
          {"split_seed", r.split_seed},
          {"train_fraction", r.train_fraction},
          {"cv_folds", r.cv_folds},
          {"selection_metric", r.selection_metric}};
}

EvaluationReport report_from(const json& j) {
  EvaluationReport r;
  for (const auto& [name, rep] : j.at("dimensions").items()) {
    const auto d = dimension_from_string(name);
    if (!d) throw BundleError("unknown dimension in report: " + name);
    r.dimensions[*d] = DimensionReport{rep.at("pearson_r").get<double>(), rep.at("p_value").get<double>(),
                                       rep.at("n_test").get<std::size_t>(), rep.value("n_train", std::size_t{0}),
                                       rep.value("cv_score", 0.0)};
  }
  r.split_seed = j.at("split_seed").get<std::uint64_t>();
  r.train_fraction = j.at("train_fraction").get<double>();
  r.cv_folds = j.value("cv_folds", 0);
  r.selection_metric = j.value("selection_metric", std::string("pearson_r"));
  return r;
}

json trained_content(const ModelBundle& b) {
  json models = json::object();
  json best = json::object();
  for (const auto& [d, m] : b.models) models[std::string(to_string(d))] = model_json(m);
  for (const auto& [d, p] : b.best_params) best[std::string(to_string(d))] = params_json(p);
  return {{"schema_version", kBundleSchemaVersion},
          {"provider_spec", provider_json(b.provider_spec)},
          {"standardizer", {{"means", b.standardizer.means}, {"stds", b.standardizer.stds}}},
          {"models", std::move(models)},
          {"best_params", std::move(best)},
          {"report", report_json(b.report)}};
}

}  // namespace

void ModelBundle::validate() const {
  for (auto d : kAllDimensions) {
    if (!models.contains(d)) throw BundleError("bundle lacks a model for " + std::string(to_string(d)));
    if (models.at(d).n_features != standardizer.dim()) throw BundleError("model width differs from standardizer");
  }
  if (provider_spec.dim != standardizer.dim()) throw BundleError("provider dim differs from standardizer dim");
  if (standardizer.stds.size() != standardizer.means.size()) throw BundleError("standardizer arrays differ in length");
  for (double s : standardizer.stds) {
    if (!(s > 0.0)) throw BundleError("standardizer has a non-positive std");
  }
}

std::string content_version(const ModelBundle& bundle) {
  return "gbt-" + ContentHash::of(trained_content(bundle).dump()).hex().substr(0, 12);
}

json to_json(const ModelBundle& bundle) {
  json doc = trained_content(bundle);
  doc["version"] = bundle.version;
  doc["trained_at"] = to_iso8601(bundle.trained_at);
  doc["trained_at_ms"] = to_epoch_ms(bundle.trained_at);
  return doc;
}

ModelBundle bundle_from_json(const json& doc) {
  try {
    if (doc.at("schema_version").get<int>() != kBundleSchemaVersion) {
      throw BundleError("unsupported bundle schema_version " + doc.at("schema_version").dump());
    }
    ModelBundle b;
    b.provider_spec = provider_from(doc.at("provider_spec"));
    b.standardizer.means = doc.at("standardizer").at("means").get<std::vector<double>>();
    b.standardizer.stds = doc.at("standardizer").at("stds").get<std::vector<double>>();
    for (const auto& [name, m] : doc.at("models").items()) {
      const auto d = dimension_from_string(name);
      if (!d) throw BundleError("unknown dimension: " + name);
      b.models[*d] = model_from(m);
    }
    for (const auto& [name, p] : doc.at("best_params").items()) {
      const auto d = dimension_from_string(name);
      if (!d) throw BundleError("unknown dimension: " + name);
      b.best_params[*d] = params_from(p);
    }
    b.report = report_from(doc.at("report"));
    b.version = doc.at("version").get<std::string>();
    b.trained_at = from_epoch_ms(doc.at("trained_at_ms").get<std::int64_t>());
    b.validate();
    return b;
  } catch (const json::exception& e) {
    throw BundleError(std::string("malformed bundle: ") + e.what());
  }
}

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw BundleError("cannot write bundle to " + path.string());
  out << to_json(bundle).dump() << '\n';
  if (!out) throw BundleError("failed writing bundle to " + path.string());
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BundleError("cannot open bundle " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw BundleError("bundle " + path.string() + " is not JSON: " + e.what());
  }
  return bundle_from_json(doc);
}

}  // namespace cle::learn
