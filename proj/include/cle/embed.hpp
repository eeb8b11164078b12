#pragma once

#include "cle/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cle::embed {

inline constexpr std::string_view kFallbackProviderId = "hashed-tf-fallback";
inline constexpr std::string_view kExternalProviderId = "transformer-external";
inline constexpr std::string_view kFallbackProviderVersion = "1";
inline constexpr std::size_t kFallbackDefaultDim = 256;
inline constexpr std::size_t kExternalDefaultDim = 768;
/// Seed mixed into the FNV-1a offset basis by the fallback provider.
inline constexpr std::uint64_t kFallbackHashSeed = 0x436f6e74656e744cULL;

enum class EmbedErrorKind { EmptyInput, ProviderUnavailable, InvalidSpec, TooFewRows, NonFiniteInput, DimensionMismatch };

std::string_view to_string(EmbedErrorKind kind);

class EmbedError : public std::runtime_error {
 public:
  EmbedError(EmbedErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  EmbedErrorKind kind() const noexcept { return kind_; }

 private:
  EmbedErrorKind kind_;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::size_t dim = 0;
  std::string provider_id;
  std::string provider_version;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

/// Which provider to use and how to reach it.
///
/// hashed-tf-fallback: no parameters. transformer-external: either
/// `endpoint_url` (POST {"tokens": [...]} -> {"token_embeddings": [[...], ...]})
/// or `model_path` (text table, one "token v1 ... vN" row per line); optional
/// `pooling` (only "mean") and `version`.
struct EmbeddingProviderSpec {
  std::string provider_id{kFallbackProviderId};
  std::size_t dim = kFallbackDefaultDim;
  std::map<std::string, std::string> parameters;

  static EmbeddingProviderSpec fallback(std::size_t dim = kFallbackDefaultDim);

  friend bool operator==(const EmbeddingProviderSpec&, const EmbeddingProviderSpec&) = default;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string_view id() const = 0;
  virtual std::string version() const = 0;
  virtual std::size_t dim() const = 0;
  /// Throws EmbedError(EmptyInput) for an empty token list.
  virtual EmbeddingVector embed(std::span<const std::string> tokens) const = 0;
};

/// Signed term-frequency feature hashing.
///
/// Each token is ASCII-lowercased and hashed as h = mix64(fnv1a64(token, basis))
/// with basis = FNV offset basis XOR kFallbackHashSeed. The token adds +1 to
/// bucket h mod dim when the top bit of h is 0 and -1 otherwise; the vector is
/// then divided by the token count. Token order does not matter.
class HashedTfProvider final : public EmbeddingProvider {
 public:
  explicit HashedTfProvider(std::size_t dim = kFallbackDefaultDim);
  std::string_view id() const override { return kFallbackProviderId; }
  std::string version() const override { return std::string(kFallbackProviderVersion); }
  std::size_t dim() const override { return dim_; }
  EmbeddingVector embed(std::span<const std::string> tokens) const override;

  static std::uint64_t token_hash(std::string_view token);

 private:
  std::size_t dim_;
};

/// Builds the provider named by spec.provider_id. Throws EmbedError(InvalidSpec).
std::unique_ptr<EmbeddingProvider> make_provider(const EmbeddingProviderSpec& spec);

/// One-shot convenience over make_provider(spec)->embed(tokens).
EmbeddingVector embed_tokens(std::span<const std::string> tokens, const EmbeddingProviderSpec& spec);

/// Per-column mean and population standard deviation.
struct Standardizer {
  std::vector<double> means;
  std::vector<double> stds;

  std::size_t dim() const noexcept { return means.size(); }
  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

/// Standard deviations below this are stored as 1.0.
inline constexpr double kMinStd = 1e-12;

/// Needs at least two rows and finite entries.
Standardizer fit_standardizer(const Matrix& x);
Matrix transform(const Matrix& x, const Standardizer& s);
std::vector<double> transform_row(std::span<const double> x, const Standardizer& s);

}  // namespace cle::embed
