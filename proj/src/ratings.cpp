#include "cle/learn/ratings.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace cle::learn {

namespace {

// Splits one CSV line (RFC 4180 quoting, no embedded newlines). nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split_csv(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) return std::nullopt;
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

// Empty -> absent; otherwise must be a plain integer.
bool parse_rating(const std::string& field, std::optional<int>& out) {
  if (field.empty()) {
    out.reset();
    return true;
  }
  int v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) return false;
  out = v;
  return true;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::optional<double> target_for(const RatingRecord& record, Dimension dim) {
  switch (dim) {
    case Dimension::Actionability:
      if (record.actionability) return static_cast<double>(*record.actionability);
      return std::nullopt;
    case Dimension::Knowledge:
      if (record.knowledge) return static_cast<double>(*record.knowledge);
      return std::nullopt;
    case Dimension::Emotion:
      if (record.positive_emotion && record.negative_emotion) {
        return static_cast<double>(*record.positive_emotion - *record.negative_emotion);
      }
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<std::string> check_record(const RatingRecord& record) {
  if (record.participant_id.empty()) return "participant_id is empty";
  if (record.url.empty()) return "url is empty";
  const std::pair<const char*, const std::optional<int>*> fields[] = {
      {"actionability", &record.actionability},
      {"knowledge", &record.knowledge},
      {"positive_emotion", &record.positive_emotion},
      {"negative_emotion", &record.negative_emotion},
  };
  bool any = false;
  for (const auto& [name, value] : fields) {
    if (!value->has_value()) continue;
    any = true;
    if (**value < kMinRating || **value > kMaxRating) {
      return std::string(name) + "=" + std::to_string(**value) + " is outside 1-6";
    }
  }
  if (!any) return "no rating present";
  if (record.positive_emotion.has_value() != record.negative_emotion.has_value()) {
    return "positive_emotion and negative_emotion must be given together";
  }
  return std::nullopt;
}

IngestResult parse_ratings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kRatingsHeader) {
    throw IngestError(IngestError::Kind::BadHeader, "ratings file must start with '" + std::string(kRatingsHeader) + "'");
  }
  IngestResult result;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    ++row;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (!fields || fields->size() != 6) {
      result.diagnostics.push_back({row, DiagnosticKind::ParseError,
                                    fields ? "expected 6 fields, got " + std::to_string(fields->size())
                                           : std::string("unterminated quote")});
      continue;
    }
    RatingRecord rec;
    rec.participant_id = (*fields)[0];
    rec.url = (*fields)[1];
    const bool ok = parse_rating((*fields)[2], rec.actionability) && parse_rating((*fields)[3], rec.knowledge) &&
                    parse_rating((*fields)[4], rec.positive_emotion) &&
                    parse_rating((*fields)[5], rec.negative_emotion);
    if (!ok) {
      result.diagnostics.push_back({row, DiagnosticKind::ParseError, "rating is not an integer"});
      continue;
    }
    if (auto why = check_record(rec)) {
      result.diagnostics.push_back({row, DiagnosticKind::InvariantViolation, *why});
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

IngestResult ingest_ratings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError(IngestError::Kind::FileMissing, "cannot open ratings file " + path.string());
  return parse_ratings(in);
}

void write_ratings(std::ostream& out, const std::vector<RatingRecord>& records) {
  const auto opt = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
  out << kRatingsHeader << '\n';
  for (const auto& r : records) {
    out << csv_field(r.participant_id) << ',' << csv_field(r.url) << ',' << opt(r.actionability) << ','
        << opt(r.knowledge) << ',' << opt(r.positive_emotion) << ',' << opt(r.negative_emotion) << '\n';
  }
}

}  // namespace cle::learn
