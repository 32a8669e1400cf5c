#include "erag/embedding.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>

#include "erag/errors.hpp"

namespace erag {

bool EmbeddingVector::embeddable() const {
  for (double v : values) {
    if (v != 0.0) return true;
  }
  return false;
}

double EmbeddingVector::norm() const { return std::sqrt(dot(*this, *this)); }

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) {
    throw ValidationError("embedding dimension mismatch: " + std::to_string(a.dimension()) +
                          " vs " + std::to_string(b.dimension()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) sum += a.values[i] * b.values[i];
  return sum;
}

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw ValidationError("embedding dimension must be positive");
}

std::string HashingEmbedder::padded_form(std::string_view text) {
  std::string out = " ";
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = out.size() > 1;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  if (out.size() == 1) return {};
  out.push_back(' ');
  return out;
}

EmbeddingVector HashingEmbedder::embed(std::string_view text) const {
  if (text.empty()) throw ValidationError("cannot embed empty text");
  EmbeddingVector vec{std::vector<double>(dimension_, 0.0)};
  const std::string padded = padded_form(text);
  if (padded.size() < 3) return vec;

  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    std::uint32_t h = 2166136261u;
    for (std::size_t j = i; j < i + 3; ++j) {
      h ^= static_cast<unsigned char>(padded[j]);
      h *= 16777619u;
    }
    vec.values[h % dimension_] += 1.0;
  }
  double sq = 0.0;
  for (double v : vec.values) sq += v * v;
  const double n = std::sqrt(sq);
  for (double& v : vec.values) v /= n;
  return vec;
}

}  // namespace erag
