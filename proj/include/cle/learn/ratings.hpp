#pragma once

#include "cle/dimension.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cle::learn {

inline constexpr int kMinRating = 1;
inline constexpr int kMaxRating = 6;

/// Expected ratings CSV header.
inline constexpr std::string_view kRatingsHeader =
    "participant_id,url,actionability,knowledge,positive_emotion,negative_emotion";

/// One participant's 1-6 ratings of one webpage.
struct RatingRecord {
  std::string participant_id;
  std::string url;
  std::optional<int> actionability;
  std::optional<int> knowledge;
  std::optional<int> positive_emotion;
  std::optional<int> negative_emotion;

  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

/// Regression target of a record for one dimension, if the record rates it.
/// Emotion is positive_emotion - negative_emotion.
std::optional<double> target_for(const RatingRecord& record, Dimension dim);

/// Empty when the record satisfies every invariant, otherwise the reason.
std::optional<std::string> check_record(const RatingRecord& record);

enum class DiagnosticKind { ParseError, InvariantViolation };

struct IngestDiagnostic {
  std::size_t row = 0;  // 1-based data row, header excluded
  DiagnosticKind kind = DiagnosticKind::ParseError;
  std::string message;
};

struct IngestResult {
  std::vector<RatingRecord> records;
  std::vector<IngestDiagnostic> diagnostics;
};

class IngestError : public std::runtime_error {
 public:
  enum class Kind { FileMissing, BadHeader };
  IngestError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Reads the ratings CSV. Bad rows are skipped and reported as diagnostics;
/// a missing file or wrong header throws IngestError.
IngestResult ingest_ratings(const std::filesystem::path& path);
IngestResult parse_ratings(std::istream& in);

/// Writes records in the ingest format (header included).
void write_ratings(std::ostream& out, const std::vector<RatingRecord>& records);

}  // namespace cle::learn
