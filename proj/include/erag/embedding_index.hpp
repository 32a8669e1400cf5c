#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "erag/embedding.hpp"
#include "erag/scene_graph.hpp"

namespace erag {

/// Retrievable projection of one scene-graph entity.
struct Document {
  std::string doc_id;
  std::string page_content;
  AttributeMap metadata;
};

enum class Comparator { kEq, kNeq };

const char* to_string(Comparator cmp);
Comparator comparator_from_string(const std::string& text);

/// A document without the named attribute fails the filter for either
/// comparator.
struct MetadataFilter {
  std::string attribute;
  Comparator comparator = Comparator::kEq;
  AttributeValue value;

  bool matches(const AttributeMap& metadata) const;
  bool operator==(const MetadataFilter&) const = default;
  bool operator<(const MetadataFilter& other) const;
};

struct RetrievalParams {
  static constexpr int kDefaultK = 5;
  static constexpr double kDefaultThreshold = 0.35;

  int k = kDefaultK;
  double threshold = kDefaultThreshold;
  std::vector<MetadataFilter> metadata_filter;

  /// Throws ValidationError unless k >= 1 and threshold is in [-1, 1].
  void validate() const;
};

struct ScoredDocument {
  std::string doc_id;
  double similarity = 0.0;

  bool operator==(const ScoredDocument&) const = default;
};

/// Ranking order: similarity descending, then doc_id ascending.
bool ranks_before(const ScoredDocument& a, const ScoredDocument& b);

/// Exhaustive cosine-similarity document store. One writer, many readers:
/// queries never observe a partially applied delta.
class EmbeddingIndex {
 public:
  explicit EmbeddingIndex(std::shared_ptr<const Embedder> embedder);

  void upsert_document(Document doc);
  bool remove_document(const std::string& doc_id);

  std::vector<ScoredDocument> query(const std::string& text, const RetrievalParams& params) const;

  /// Mirrors the entity changes of `delta`, reading current entity state from
  /// `graph` (the graph the delta was produced on).
  void apply_graph_delta(const SceneGraph& graph, const GraphDelta& delta);

  std::size_t size() const;
  bool contains(const std::string& doc_id) const;
  std::optional<Document> document(const std::string& doc_id) const;
  std::optional<EmbeddingVector> vector(const std::string& doc_id) const;
  std::set<std::string> doc_ids() const;

  /// True when doc ids equal the graph's entity ids and every document's
  /// content and metadata match its entity.
  bool mirrors(const SceneGraph& graph) const;

  const Embedder& embedder() const { return *embedder_; }

  static Document document_for(const Entity& entity);

 private:
  struct Stored {
    Document doc;
    EmbeddingVector vec;
  };

  void upsert_locked(Document doc);

  std::shared_ptr<const Embedder> embedder_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Stored> docs_;
};

}  // namespace erag
