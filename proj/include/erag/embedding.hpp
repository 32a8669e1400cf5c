#pragma once

#include <chrono>
#include <cstddef>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace erag {

/// Unit-length text embedding. A text with no features maps to the zero
/// vector, which is reported as unembeddable.
struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dimension() const { return values.size(); }
  bool embeddable() const;
  double norm() const;

  bool operator==(const EmbeddingVector&) const = default;
};

/// Dot product accumulated in ascending index order. For unit vectors this
/// is the cosine similarity.
double dot(const EmbeddingVector& a, const EmbeddingVector& b);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dimension() const = 0;
  /// Throws ValidationError on empty text.
  virtual EmbeddingVector embed(std::string_view text) const = 0;
};

/// Character-trigram feature hashing.
///
/// The text is lowercased (ASCII), whitespace runs are collapsed and the
/// result is padded with one space on each side. Every trigram of the padded
/// string is hashed with 32-bit FNV-1a into one of `dimension` buckets, the
/// bucket counts are accumulated, and the count vector is L2-normalized.
class HashingEmbedder final : public Embedder {
 public:
  static constexpr std::size_t kDefaultDimension = 256;

  explicit HashingEmbedder(std::size_t dimension = kDefaultDimension);

  std::size_t dimension() const override { return dimension_; }
  EmbeddingVector embed(std::string_view text) const override;

  /// Lowercased, whitespace-collapsed, space-padded form that is trigrammed.
  static std::string padded_form(std::string_view text);

 private:
  std::size_t dimension_;
};

struct RemoteEmbeddingEndpoint {
  std::string url;  // e.g. https://api.openai.com/v1/embeddings
  std::string model;
  std::string api_key;
  std::chrono::seconds timeout{60};
};

/// Embeddings from an HTTP endpoint speaking the common
/// {"model", "input": [...]} -> {"data": [{"embedding": [...]}]} schema.
/// The dimension is fixed by the first response (or by `expected_dimension`
/// when nonzero) and every later response is checked against it.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(RemoteEmbeddingEndpoint endpoint, std::size_t expected_dimension = 0);

  std::size_t dimension() const override;
  EmbeddingVector embed(std::string_view text) const override;

 private:
  RemoteEmbeddingEndpoint endpoint_;
  mutable std::mutex mutex_;
  mutable std::size_t dimension_;
};

}  // namespace erag
