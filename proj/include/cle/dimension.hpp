#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace cle {

/// The three content-label dimensions.
enum class Dimension { Actionability, Knowledge, Emotion };

inline constexpr std::array<Dimension, 3> kAllDimensions = {
    Dimension::Actionability, Dimension::Knowledge, Dimension::Emotion};

constexpr std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::Actionability: return "actionability";
    case Dimension::Knowledge: return "knowledge";
    case Dimension::Emotion: return "emotion";
  }
  return "unknown";
}

constexpr std::optional<Dimension> dimension_from_string(std::string_view s) {
  for (auto d : kAllDimensions) {
    if (to_string(d) == s) return d;
  }
  return std::nullopt;
}

/// Raw score range for a dimension: ratings are 1..6, Emotion is positive minus negative.
struct ScoreRange {
  double lo;
  double hi;
};

constexpr ScoreRange raw_range(Dimension d) {
  return d == Dimension::Emotion ? ScoreRange{-5.0, 5.0} : ScoreRange{1.0, 6.0};
}

}  // namespace cle
