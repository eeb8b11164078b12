#include "cle/learn/trainer.hpp"
#include "synthetic.hpp"

#include <gtest/gtest.h>

#include <set>

namespace cle::learn {
namespace {

Timestamp frozen() { return from_epoch_ms(1714564800000); }

testing::SyntheticCorpus small_corpus(std::uint64_t seed = 3) {
  testing::SyntheticOptions o;
  o.participants = 30;
  o.page_pool = 60;
  o.seed = seed;
  return testing::make_synthetic(o);
}

TrainOptions fast_options() {
  TrainOptions o;
  o.fast = true;
  o.clock = frozen;
  return o;
}

TEST(TrainAll, FastModeUsesDefaultParams) {
  const auto corpus = small_corpus();
  const auto b = train_all(corpus.ratings, corpus.source(), embed::EmbeddingProviderSpec::fallback(), fast_options());
  for (auto d : kAllDimensions) {
    EXPECT_EQ(b.best_params.at(d), (GbtParams{200, 0.1, 5, 1}));
    EXPECT_EQ(b.models.at(d).trees.size(), 200u);
  }
  EXPECT_EQ(b.report.cv_folds, 0);
  EXPECT_EQ(b.trained_at, frozen());
  EXPECT_EQ(b.version, content_version(b));
}

TEST(TrainAll, Deterministic) {
  const auto corpus = small_corpus();
  auto o = fast_options();
  o.fast_params = GbtParams{20, 0.1, 3, 1};
  const auto spec = embed::EmbeddingProviderSpec::fallback(64);
  EXPECT_EQ(train_all(corpus.ratings, corpus.source(), spec, o), train_all(corpus.ratings, corpus.source(), spec, o));
}

TEST(TrainAll, GridSearchPicksFromGrid) {
  const auto corpus = small_corpus();
  TrainOptions o;
  o.clock = frozen;
  o.folds = 3;
  o.grid = {GbtParams{10, 0.1, 1, 1}, GbtParams{30, 0.2, 3, 1}};
  const auto b = train_all(corpus.ratings, corpus.source(), embed::EmbeddingProviderSpec::fallback(64), o);
  for (auto d : kAllDimensions) {
    const auto& p = b.best_params.at(d);
    EXPECT_TRUE(p == o.grid[0] || p == o.grid[1]);
    EXPECT_EQ(b.models.at(d).params, p);
  }
  EXPECT_EQ(b.report.cv_folds, 3);
}

TEST(TrainAll, PlantedSignalIsLearned) {
  testing::SyntheticOptions so;
  so.participants = 100;
  const auto corpus = testing::make_synthetic(so);
  const auto b = train_all(corpus.ratings, corpus.source(), embed::EmbeddingProviderSpec::fallback(), fast_options());
  for (auto d : kAllDimensions) EXPECT_GE(b.report.dimensions.at(d).pearson_r, 0.8) << to_string(d);
}

TEST(TrainAll, StandardizerSeesTrainingParticipantsOnly) {
  // Test-side pages get extreme feature values; a leaking standardizer would
  // shift towards them.
  auto corpus = small_corpus();
  std::vector<std::string> participants;
  for (const auto& r : corpus.ratings) participants.push_back(r.participant_id);
  const auto split = group_split(participants, 0.8, 42);
  const std::set<std::string> test_ids(split.test_groups.begin(), split.test_groups.end());
  std::vector<RatingRecord> ratings;
  for (auto r : corpus.ratings) {
    if (test_ids.contains(r.participant_id)) {
      r.url = "https://synthetic.test/extreme/" + r.participant_id + "/" + r.url;
      corpus.html[r.url] = "<p>" + std::string(100, 'z') + " zz zzz zzzz zzzzz zzzzzz zzzzzzz zzzzzzzz zzzzzzzzz zzzzzzzzzz</p>";
    }
    ratings.push_back(r);
  }
  const embed::HashedTfProvider provider(64);
  const auto pages = corpus.source();
  const auto b = train_all(ratings, pages, embed::EmbeddingProviderSpec::fallback(64), fast_options());

  Matrix train_rows(0, 64);
  for (auto i : split.train) train_rows.append_row(provider.embed(pages(ratings[i].url)->cleaned_tokens).values);
  EXPECT_EQ(b.standardizer, embed::fit_standardizer(train_rows));
  std::size_t expected_test = 0;
  for (const auto& r : ratings) expected_test += test_ids.contains(r.participant_id) ? 1 : 0;
  EXPECT_EQ(b.report.dimensions.at(Dimension::Knowledge).n_test, expected_test);
}

TEST(TrainAll, UnusablePagesAreSkipped) {
  auto corpus = small_corpus();
  corpus.html["https://synthetic.test/page/0"] = "<p>short</p>";
  corpus.html.erase("https://synthetic.test/page/1");
  const embed::HashedTfProvider provider(256);
  const auto table = build_feature_table(corpus.ratings, corpus.source(), provider);
  EXPECT_FALSE(table.row_of.contains("https://synthetic.test/page/0"));
  EXPECT_FALSE(table.row_of.contains("https://synthetic.test/page/1"));
  EXPECT_EQ(table.features.rows(), table.row_of.size());
  EXPECT_NO_THROW(train_all(corpus.ratings, corpus.source(), embed::EmbeddingProviderSpec::fallback(), fast_options()));
}

TEST(TrainAll, MissingEmotionThrows) {
  auto corpus = small_corpus();
  for (auto& r : corpus.ratings) r.positive_emotion = r.negative_emotion = std::nullopt;
  try {
    train_all(corpus.ratings, corpus.source(), embed::EmbeddingProviderSpec::fallback(), fast_options());
    FAIL() << "expected TrainError";
  } catch (const TrainError& e) {
    EXPECT_EQ(e.kind(), TrainError::Kind::MissingDimension);
  }
}

TEST(TrainAll, NoPagesThrows) {
  const auto corpus = small_corpus();
  const PageSource none = [](const std::string&) { return std::nullopt; };
  try {
    train_all(corpus.ratings, none, embed::EmbeddingProviderSpec::fallback(), fast_options());
    FAIL() << "expected TrainError";
  } catch (const TrainError& e) {
    EXPECT_EQ(e.kind(), TrainError::Kind::InsufficientData);
  }
}

TEST(BuildExamples, EmotionTargetsAndCounts) {
  const auto corpus = small_corpus();
  const embed::HashedTfProvider provider(32);
  const auto table = build_feature_table(corpus.ratings, corpus.source(), provider);
  const auto ex = build_examples(corpus.ratings, table, Dimension::Emotion, provider.id(), provider.version());
  ASSERT_EQ(ex.size(), corpus.ratings.size());
  for (std::size_t i = 0; i < ex.size(); ++i) {
    EXPECT_EQ(ex[i].target, *corpus.ratings[i].positive_emotion - *corpus.ratings[i].negative_emotion);
    EXPECT_EQ(ex[i].features.dim, 32u);
    EXPECT_EQ(ex[i].dimension, Dimension::Emotion);
  }
}

TEST(EvaluateBundle, ReportsEveryDimension) {
  const auto corpus = small_corpus();
  auto o = fast_options();
  o.fast_params = GbtParams{50, 0.1, 3, 1};
  const auto b = train_all(corpus.ratings, corpus.source(), embed::EmbeddingProviderSpec::fallback(), o);
  const auto other = small_corpus(99);
  const auto report = evaluate_bundle(b, other.ratings, other.source());
  for (auto d : kAllDimensions) {
    EXPECT_EQ(report.at(d).n_test, other.ratings.size());
    EXPECT_GT(report.at(d).pearson_r, 0.5) << to_string(d);
  }
}

}  // namespace
}  // namespace cle::learn
