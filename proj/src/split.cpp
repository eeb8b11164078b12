#include "cle/learn/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace cle::learn {

std::vector<std::string> distinct_groups(std::span<const std::string> group_of_row) {
  std::set<std::string> ids(group_of_row.begin(), group_of_row.end());
  return {ids.begin(), ids.end()};
}

std::size_t train_group_count(double train_fraction, std::size_t groups) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw SplitError("train_fraction must be in (0, 1)");
  // The small slack keeps products such as 0.7 * 10 = 7.000000000000001 from rounding up.
  const double exact = train_fraction * static_cast<double>(groups);
  return static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
}

GroupSplit group_split(std::span<const std::string> group_of_row, double train_fraction, std::uint64_t seed) {
  auto groups = distinct_groups(group_of_row);
  if (groups.size() < 2) throw SplitError("group split needs at least two distinct participants");
  const auto n_train = train_group_count(train_fraction, groups.size());
  deterministic_shuffle(groups, seed);

  GroupSplit out;
  out.train_groups.assign(groups.begin(), groups.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test_groups.assign(groups.begin() + static_cast<std::ptrdiff_t>(n_train), groups.end());
  const std::set<std::string> train_set(out.train_groups.begin(), out.train_groups.end());
  for (std::size_t i = 0; i < group_of_row.size(); ++i) {
    (train_set.contains(group_of_row[i]) ? out.train : out.test).push_back(i);
  }
  return out;
}

std::pair<std::vector<TrainingExample>, std::vector<TrainingExample>> group_split(
    const std::vector<TrainingExample>& examples, double train_fraction, std::uint64_t seed) {
  std::vector<std::string> groups;
  groups.reserve(examples.size());
  for (const auto& e : examples) groups.push_back(e.participant_id);
  const auto split = group_split(groups, train_fraction, seed);
  std::pair<std::vector<TrainingExample>, std::vector<TrainingExample>> out;
  for (auto i : split.train) out.first.push_back(examples[i]);
  for (auto i : split.test) out.second.push_back(examples[i]);
  return out;
}

std::vector<int> group_kfold(std::span<const std::string> group_of_row, int k, std::uint64_t seed) {
  if (k < 2) throw SplitError("k-fold needs k >= 2");
  auto groups = distinct_groups(group_of_row);
  if (groups.size() < static_cast<std::size_t>(k)) {
    throw SplitError("only " + std::to_string(groups.size()) + " participants for " + std::to_string(k) + " folds");
  }
  deterministic_shuffle(groups, seed);
  std::map<std::string, int> fold_of;
  for (std::size_t i = 0; i < groups.size(); ++i) fold_of[groups[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  std::vector<int> out(group_of_row.size());
  for (std::size_t i = 0; i < group_of_row.size(); ++i) out[i] = fold_of.at(group_of_row[i]);
  return out;
}

}  // namespace cle::learn
