#include "cle/learn/trainer.hpp"
#include "cle/learn/stats.hpp"

#include <set>

namespace cle::learn {

namespace {

// Undefined correlations (constant predictions) are reported as r = 0, p = 1.
PearsonResult safe_pearson(std::span<const double> a, std::span<const double> b) {
  try {
    return pearson(a, b);
  } catch (const StatsError&) {
    return PearsonResult{};
  }
}

struct DimensionData {
  Dataset train;
  Matrix test_x;
  std::vector<double> test_y;
};

}  // namespace

FeatureTable build_feature_table(const std::vector<RatingRecord>& ratings, const PageSource& pages,
                                 const embed::EmbeddingProvider& provider) {
  std::set<std::string> urls;
  for (const auto& r : ratings) urls.insert(r.url);
  FeatureTable table;
  table.features = Matrix(0, provider.dim());
  for (const auto& url : urls) {
    const auto doc = pages(url);
    if (!doc || !doc->validity.is_valid()) {
      table.unusable_urls.push_back(url);
      continue;
    }
    const auto vec = provider.embed(doc->cleaned_tokens);
    table.row_of[url] = table.features.rows();
    table.features.append_row(vec.values);
  }
  return table;
}

std::vector<TrainingExample> build_examples(const std::vector<RatingRecord>& ratings, const FeatureTable& table,
                                            Dimension dim, std::string_view provider_id,
                                            std::string_view provider_version) {
  std::vector<TrainingExample> out;
  for (const auto& r : ratings) {
    const auto target = target_for(r, dim);
    const auto it = table.row_of.find(r.url);
    if (!target || it == table.row_of.end()) continue;
    const auto row = table.features.row(it->second);
    out.push_back(TrainingExample{
        embed::EmbeddingVector{{row.begin(), row.end()}, row.size(), std::string(provider_id),
                               std::string(provider_version)},
        *target, r.participant_id, r.url, dim});
  }
  return out;
}

ModelBundle train_all(const std::vector<RatingRecord>& ratings, const PageSource& pages,
                      const embed::EmbeddingProviderSpec& provider_spec, const TrainOptions& options) {
  const auto provider = embed::make_provider(provider_spec);
  const auto table = build_feature_table(ratings, pages, *provider);

  std::vector<const RatingRecord*> usable;
  std::vector<std::string> participant_of;
  for (const auto& r : ratings) {
    if (!table.row_of.contains(r.url)) continue;
    usable.push_back(&r);
    participant_of.push_back(r.participant_id);
  }
  if (usable.empty()) throw TrainError(TrainError::Kind::InsufficientData, "no rated page has usable text");

  const auto split = group_split(participant_of, options.train_fraction, options.split_seed);
  const std::set<std::string> train_groups(split.train_groups.begin(), split.train_groups.end());

  // Standardizer sees training-split rows only.
  Matrix train_rows(0, provider->dim());
  for (auto i : split.train) train_rows.append_row(table.features.row(table.row_of.at(usable[i]->url)));
  ModelBundle bundle;
  bundle.provider_spec = provider_spec;
  bundle.standardizer = embed::fit_standardizer(train_rows);

  std::map<Dimension, DimensionData> data;
  for (auto dim : kAllDimensions) {
    auto& dd = data[dim];
    dd.train.x = Matrix(0, provider->dim());
    dd.test_x = Matrix(0, provider->dim());
    for (const auto* r : usable) {
      const auto target = target_for(*r, dim);
      if (!target) continue;
      const auto x = embed::transform_row(table.features.row(table.row_of.at(r->url)), bundle.standardizer);
      if (train_groups.contains(r->participant_id)) {
        dd.train.x.append_row(x);
        dd.train.y.push_back(*target);
        dd.train.groups.push_back(r->participant_id);
      } else {
        dd.test_x.append_row(x);
        dd.test_y.push_back(*target);
      }
    }
    if (dd.train.y.empty() && dd.test_y.empty()) {
      throw TrainError(TrainError::Kind::MissingDimension, "no usable ratings for " + std::string(to_string(dim)));
    }
    if (dd.train.y.size() < 2 || dd.test_y.size() < 3) {
      throw TrainError(TrainError::Kind::InsufficientData,
                       "too few " + std::string(to_string(dim)) + " ratings on one side of the split (" +
                           std::to_string(dd.train.y.size()) + " train, " + std::to_string(dd.test_y.size()) +
                           " test)");
    }
  }

  bundle.report.split_seed = options.split_seed;
  bundle.report.train_fraction = options.train_fraction;
  bundle.report.cv_folds = options.fast ? 0 : options.folds;
  for (auto dim : kAllDimensions) {
    const auto& dd = data.at(dim);
    DimensionReport rep;
    GbtParams params = options.fast_params;
    if (!options.fast) {
      const auto search = grid_search(dd.train, options.grid, options.folds, options.split_seed);
      params = search.best;
      rep.cv_score = search.best_score;
    }
    auto model = fit_gbt(dd.train.x, dd.train.y, params, options.split_seed);
    const auto pr = safe_pearson(predict_gbt(model, dd.test_x), dd.test_y);
    rep.pearson_r = pr.r;
    rep.p_value = pr.p_value;
    rep.n_test = dd.test_y.size();
    rep.n_train = dd.train.y.size();
    bundle.report.dimensions[dim] = rep;
    bundle.best_params[dim] = params;
    bundle.models[dim] = std::move(model);
  }
  bundle.version = content_version(bundle);
  bundle.trained_at = options.clock();
  bundle.validate();
  return bundle;
}

std::map<Dimension, DimensionReport> evaluate_bundle(const ModelBundle& bundle,
                                                     const std::vector<RatingRecord>& ratings,
                                                     const PageSource& pages) {
  bundle.validate();
  const auto provider = embed::make_provider(bundle.provider_spec);
  const auto table = build_feature_table(ratings, pages, *provider);
  std::map<Dimension, DimensionReport> out;
  for (auto dim : kAllDimensions) {
    std::vector<double> predicted;
    std::vector<double> actual;
    for (const auto& r : ratings) {
      const auto target = target_for(r, dim);
      const auto it = table.row_of.find(r.url);
      if (!target || it == table.row_of.end()) continue;
      const auto x = embed::transform_row(table.features.row(it->second), bundle.standardizer);
      predicted.push_back(predict_gbt(bundle.models.at(dim), x));
      actual.push_back(*target);
    }
    DimensionReport rep;
    rep.n_test = actual.size();
    if (actual.size() >= 3) {
      const auto pr = safe_pearson(predicted, actual);
      rep.pearson_r = pr.r;
      rep.p_value = pr.p_value;
    }
    out[dim] = rep;
  }
  return out;
}

}  // namespace cle::learn
