#pragma once

#include "cle/dimension.hpp"
#include "cle/embed.hpp"

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cle::learn {

class SplitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One rated webpage prepared for one label dimension.
struct TrainingExample {
  embed::EmbeddingVector features;
  double target = 0.0;
  std::string participant_id;
  std::string url;
  Dimension dimension = Dimension::Actionability;
};

/// Fisher-Yates shuffle driven by mt19937_64 with rejection-sampled indices,
/// so the permutation for a seed is the same on every platform.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw = rng();
    while (draw >= limit) draw = rng();
    std::swap(items[i - 1], items[static_cast<std::size_t>(draw % bound)]);
  }
}

/// Distinct ids, sorted.
std::vector<std::string> distinct_groups(std::span<const std::string> group_of_row);

/// Number of groups that go to training: ceil(train_fraction * groups).
std::size_t train_group_count(double train_fraction, std::size_t groups);

struct GroupSplit {
  std::vector<std::size_t> train;  // row indices, ascending
  std::vector<std::size_t> test;
  std::vector<std::string> train_groups;
  std::vector<std::string> test_groups;
};

/// Shuffles the sorted distinct groups with `seed`; the first
/// ceil(train_fraction * #groups) go to training. Each row follows its group.
GroupSplit group_split(std::span<const std::string> group_of_row, double train_fraction, std::uint64_t seed);

std::pair<std::vector<TrainingExample>, std::vector<TrainingExample>> group_split(
    const std::vector<TrainingExample>& examples, double train_fraction, std::uint64_t seed);

/// Assigns each row a fold in [0, k): groups are shuffled with `seed` and dealt
/// round-robin, so a group lands in exactly one fold.
std::vector<int> group_kfold(std::span<const std::string> group_of_row, int k, std::uint64_t seed);

}  // namespace cle::learn
