// Regenerates tests/data/tiny.bundle.json, the small model used by the scoring,
// service and CLI tests. Usage: make_tiny_bundle OUT_PATH
#include "cle/learn/trainer.hpp"
#include "synthetic.hpp"

#include <iostream>

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_tiny_bundle OUT_PATH\n";
    return 2;
  }
  cle::testing::SyntheticOptions so;
  so.participants = 30;
  so.page_pool = 60;
  so.seed = 11;
  const auto corpus = cle::testing::make_synthetic(so);

  cle::learn::TrainOptions options;
  options.fast = true;
  options.fast_params = cle::learn::GbtParams{20, 0.1, 3, 1};
  options.clock = [] { return cle::from_epoch_ms(1714564800000); };  // 2024-05-01T12:00:00Z
  const auto bundle =
      cle::learn::train_all(corpus.ratings, corpus.source(), cle::embed::EmbeddingProviderSpec::fallback(64), options);
  cle::learn::save_bundle(bundle, argv[1]);
  std::cout << bundle.version << '\n';
  return 0;
}
