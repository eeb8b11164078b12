#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cle/embed.hpp"
#include "cle/hash.hpp"
#include "cle/url.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace cle::embed {

namespace {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string param_or(const EmbeddingProviderSpec& spec, const std::string& key, std::string fallback) {
  auto it = spec.parameters.find(key);
  return it == spec.parameters.end() ? fallback : it->second;
}

class ExternalTransformerProvider final : public EmbeddingProvider {
 public:
  explicit ExternalTransformerProvider(const EmbeddingProviderSpec& spec)
      : dim_(spec.dim),
        version_(param_or(spec, "version", "1")),
        endpoint_(param_or(spec, "endpoint_url", "")),
        model_path_(param_or(spec, "model_path", "")) {
    if (param_or(spec, "pooling", "mean") != "mean") {
      throw EmbedError(EmbedErrorKind::InvalidSpec, "only mean pooling is supported");
    }
    if (endpoint_.empty() == model_path_.empty()) {
      throw EmbedError(EmbedErrorKind::InvalidSpec, "external provider needs exactly one of endpoint_url, model_path");
    }
    if (!model_path_.empty()) load_table();
  }

  std::string_view id() const override { return kExternalProviderId; }
  std::string version() const override { return version_; }
  std::size_t dim() const override { return dim_; }

  EmbeddingVector embed(std::span<const std::string> tokens) const override {
    if (tokens.empty()) throw EmbedError(EmbedErrorKind::EmptyInput, "no tokens to embed");
    EmbeddingVector out{std::vector<double>(dim_, 0.0), dim_, std::string(id()), version_};
    std::size_t pooled = 0;
    const auto accumulate = [&](std::span<const double> v) {
      for (std::size_t j = 0; j < dim_; ++j) out.values[j] += v[j];
      ++pooled;
    };
    if (!model_path_.empty()) {
      for (const auto& t : tokens) {
        if (auto it = table_.find(ascii_lower(t)); it != table_.end()) accumulate(it->second);
      }
    } else {
      for (const auto& row : query_endpoint(tokens)) accumulate(row);
    }
    if (pooled > 0) {
      for (auto& v : out.values) v /= static_cast<double>(pooled);
    }
    return out;
  }

 private:
  void load_table() {
    std::ifstream in(model_path_);
    if (!in) throw EmbedError(EmbedErrorKind::ProviderUnavailable, "model file missing: " + model_path_);
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream fields(line);
      std::string token;
      if (!(fields >> token)) continue;
      std::vector<double> v;
      v.reserve(dim_);
      double x = 0;
      while (fields >> x) v.push_back(x);
      if (v.size() != dim_) {
        throw EmbedError(EmbedErrorKind::DimensionMismatch,
                         "row for '" + token + "' has " + std::to_string(v.size()) + " values, expected " +
                             std::to_string(dim_));
      }
      table_.emplace(ascii_lower(token), std::move(v));
    }
  }

  std::vector<std::vector<double>> query_endpoint(std::span<const std::string> tokens) const {
    const auto url = parse_http_url(endpoint_);
    if (!url) throw EmbedError(EmbedErrorKind::InvalidSpec, "bad endpoint_url: " + endpoint_);
    httplib::Client client(url->scheme + "://" + url->host + ":" + std::to_string(url->effective_port()));
    client.set_connection_timeout(5);
    client.set_read_timeout(30);
    nlohmann::json body = {{"tokens", std::vector<std::string>(tokens.begin(), tokens.end())}};
    auto res = client.Post(url->target(), body.dump(), "application/json");
    if (!res || res->status != 200) {
      throw EmbedError(EmbedErrorKind::ProviderUnavailable,
                       "embedding endpoint unavailable: " + (res ? "HTTP " + std::to_string(res->status)
                                                                 : httplib::to_string(res.error())));
    }
    std::vector<std::vector<double>> rows;
    try {
      rows = nlohmann::json::parse(res->body).at("token_embeddings").get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
      throw EmbedError(EmbedErrorKind::ProviderUnavailable, std::string("malformed endpoint reply: ") + e.what());
    }
    for (const auto& r : rows) {
      if (r.size() != dim_) throw EmbedError(EmbedErrorKind::DimensionMismatch, "endpoint returned wrong width");
    }
    return rows;
  }

  std::size_t dim_;
  std::string version_;
  std::string endpoint_;
  std::string model_path_;
  std::unordered_map<std::string, std::vector<double>> table_;
};

void require_finite(const Matrix& x) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (double v : x.row(i)) {
      if (!std::isfinite(v)) throw EmbedError(EmbedErrorKind::NonFiniteInput, "matrix has a non-finite entry");
    }
  }
}

}  // namespace

std::string_view to_string(EmbedErrorKind kind) {
  switch (kind) {
    case EmbedErrorKind::EmptyInput: return "EmptyInput";
    case EmbedErrorKind::ProviderUnavailable: return "ProviderUnavailable";
    case EmbedErrorKind::InvalidSpec: return "InvalidSpec";
    case EmbedErrorKind::TooFewRows: return "TooFewRows";
    case EmbedErrorKind::NonFiniteInput: return "NonFiniteInput";
    case EmbedErrorKind::DimensionMismatch: return "DimensionMismatch";
  }
  return "Unknown";
}

EmbeddingProviderSpec EmbeddingProviderSpec::fallback(std::size_t dim) {
  return EmbeddingProviderSpec{std::string(kFallbackProviderId), dim, {}};
}

HashedTfProvider::HashedTfProvider(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw EmbedError(EmbedErrorKind::InvalidSpec, "embedding dim must be at least 1");
}

std::uint64_t HashedTfProvider::token_hash(std::string_view token) {
  return mix64(fnv1a64(ascii_lower(token), kFnvOffsetBasis ^ kFallbackHashSeed));
}

EmbeddingVector HashedTfProvider::embed(std::span<const std::string> tokens) const {
  if (tokens.empty()) throw EmbedError(EmbedErrorKind::EmptyInput, "no tokens to embed");
  EmbeddingVector out{std::vector<double>(dim_, 0.0), dim_, std::string(id()), version()};
  for (const auto& t : tokens) {
    const auto h = token_hash(t);
    out.values[h % dim_] += (h >> 63) == 0 ? 1.0 : -1.0;
  }
  const auto n = static_cast<double>(tokens.size());
  for (auto& v : out.values) v /= n;
  return out;
}

std::unique_ptr<EmbeddingProvider> make_provider(const EmbeddingProviderSpec& spec) {
  if (spec.dim == 0) throw EmbedError(EmbedErrorKind::InvalidSpec, "embedding dim must be at least 1");
  if (spec.provider_id == kFallbackProviderId) return std::make_unique<HashedTfProvider>(spec.dim);
  if (spec.provider_id == kExternalProviderId) return std::make_unique<ExternalTransformerProvider>(spec);
  throw EmbedError(EmbedErrorKind::InvalidSpec, "unknown embedding provider: " + spec.provider_id);
}

EmbeddingVector embed_tokens(std::span<const std::string> tokens, const EmbeddingProviderSpec& spec) {
  if (tokens.empty()) throw EmbedError(EmbedErrorKind::EmptyInput, "no tokens to embed");
  return make_provider(spec)->embed(tokens);
}

Standardizer fit_standardizer(const Matrix& x) {
  if (x.rows() < 2) throw EmbedError(EmbedErrorKind::TooFewRows, "standardizer needs at least two rows");
  require_finite(x);
  const auto n = static_cast<double>(x.rows());
  Standardizer s{std::vector<double>(x.cols(), 0.0), std::vector<double>(x.cols(), 0.0)};
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) s.means[j] += x(i, j);
  }
  for (auto& m : s.means) m /= n;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double d = x(i, j) - s.means[j];
      s.stds[j] += d * d;
    }
  }
  for (auto& sd : s.stds) {
    sd = std::sqrt(sd / n);
    if (sd < kMinStd) sd = 1.0;
  }
  return s;
}

std::vector<double> transform_row(std::span<const double> x, const Standardizer& s) {
  if (x.size() != s.dim()) {
    throw EmbedError(EmbedErrorKind::DimensionMismatch, "expected " + std::to_string(s.dim()) + " features, got " +
                                                            std::to_string(x.size()));
  }
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - s.means[j]) / s.stds[j];
  return out;
}

Matrix transform(const Matrix& x, const Standardizer& s) {
  if (x.cols() != s.dim()) {
    throw EmbedError(EmbedErrorKind::DimensionMismatch, "expected " + std::to_string(s.dim()) + " columns, got " +
                                                            std::to_string(x.cols()));
  }
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = (x(i, j) - s.means[j]) / s.stds[j];
  }
  return out;
}

}  // namespace cle::embed
