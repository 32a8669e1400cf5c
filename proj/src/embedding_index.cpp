#include "erag/embedding_index.hpp"

#include <algorithm>
#include <mutex>

#include "erag/errors.hpp"

namespace erag {

const char* to_string(Comparator cmp) { return cmp == Comparator::kEq ? "eq" : "neq"; }

Comparator comparator_from_string(const std::string& text) {
  if (text == "eq") return Comparator::kEq;
  if (text == "neq") return Comparator::kNeq;
  throw ValidationError("unknown comparator '" + text + "'");
}

bool MetadataFilter::matches(const AttributeMap& metadata) const {
  auto it = metadata.find(attribute);
  if (it == metadata.end()) return false;
  const bool equal = it->second == value;
  return comparator == Comparator::kEq ? equal : !equal;
}

bool MetadataFilter::operator<(const MetadataFilter& other) const {
  if (attribute != other.attribute) return attribute < other.attribute;
  if (comparator != other.comparator) return comparator < other.comparator;
  return value < other.value;
}

void RetrievalParams::validate() const {
  if (k < 1) throw ValidationError("retrieval k must be >= 1");
  if (!(threshold >= -1.0 && threshold <= 1.0)) {
    throw ValidationError("retrieval threshold must lie in [-1, 1]");
  }
}

bool ranks_before(const ScoredDocument& a, const ScoredDocument& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.doc_id < b.doc_id;
}

EmbeddingIndex::EmbeddingIndex(std::shared_ptr<const Embedder> embedder)
    : embedder_(std::move(embedder)) {
  if (!embedder_) throw ValidationError("embedding index needs an embedder");
}

Document EmbeddingIndex::document_for(const Entity& entity) {
  return {entity.id, entity.label, entity.attributes};
}

void EmbeddingIndex::upsert_locked(Document doc) {
  if (doc.doc_id.empty()) throw ValidationError("document id must be nonempty");
  if (doc.page_content.empty()) {
    throw ValidationError("document '" + doc.doc_id + "' has empty page content");
  }
  auto it = docs_.find(doc.doc_id);
  if (it != docs_.end() && it->second.doc.page_content == doc.page_content) {
    it->second.doc.metadata = std::move(doc.metadata);
    return;
  }
  EmbeddingVector vec = embedder_->embed(doc.page_content);
  if (!vec.embeddable()) {
    throw ValidationError("document '" + doc.doc_id + "' has no embeddable content");
  }
  const std::string id = doc.doc_id;
  docs_.insert_or_assign(id, Stored{std::move(doc), std::move(vec)});
}

void EmbeddingIndex::upsert_document(Document doc) {
  std::unique_lock lock(mutex_);
  upsert_locked(std::move(doc));
}

bool EmbeddingIndex::remove_document(const std::string& doc_id) {
  std::unique_lock lock(mutex_);
  return docs_.erase(doc_id) != 0;
}

std::vector<ScoredDocument> EmbeddingIndex::query(const std::string& text,
                                                  const RetrievalParams& params) const {
  params.validate();
  const EmbeddingVector q = embedder_->embed(text);
  if (!q.embeddable()) throw ValidationError("query text '" + text + "' is unembeddable");

  std::shared_lock lock(mutex_);
  std::vector<ScoredDocument> hits;
  for (const auto& [id, stored] : docs_) {
    const double sim = dot(q, stored.vec);
    if (sim < params.threshold) continue;
    const bool pass = std::all_of(params.metadata_filter.begin(), params.metadata_filter.end(),
                                  [&](const MetadataFilter& f) { return f.matches(stored.doc.metadata); });
    if (pass) hits.push_back({id, sim});
  }
  const auto keep = std::min(hits.size(), static_cast<std::size_t>(params.k));
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(),
                    ranks_before);
  hits.resize(keep);
  return hits;
}

void EmbeddingIndex::apply_graph_delta(const SceneGraph& graph, const GraphDelta& delta) {
  std::unique_lock lock(mutex_);
  for (const auto& change : delta.entities) {
    if (change.kind == ChangeKind::kRemoved) {
      docs_.erase(change.entity_id);
      continue;
    }
    // Later changes in the same delta may have removed the entity again.
    const Entity* entity = graph.find_entity(change.entity_id);
    if (entity == nullptr) {
      docs_.erase(change.entity_id);
      continue;
    }
    upsert_locked(document_for(*entity));
  }
}

std::size_t EmbeddingIndex::size() const {
  std::shared_lock lock(mutex_);
  return docs_.size();
}

bool EmbeddingIndex::contains(const std::string& doc_id) const {
  std::shared_lock lock(mutex_);
  return docs_.count(doc_id) != 0;
}

std::optional<Document> EmbeddingIndex::document(const std::string& doc_id) const {
  std::shared_lock lock(mutex_);
  auto it = docs_.find(doc_id);
  if (it == docs_.end()) return std::nullopt;
  return it->second.doc;
}

std::optional<EmbeddingVector> EmbeddingIndex::vector(const std::string& doc_id) const {
  std::shared_lock lock(mutex_);
  auto it = docs_.find(doc_id);
  if (it == docs_.end()) return std::nullopt;
  return it->second.vec;
}

std::set<std::string> EmbeddingIndex::doc_ids() const {
  std::shared_lock lock(mutex_);
  std::set<std::string> ids;
  for (const auto& [id, stored] : docs_) ids.insert(id);
  return ids;
}

bool EmbeddingIndex::mirrors(const SceneGraph& graph) const {
  std::shared_lock lock(mutex_);
  if (docs_.size() != graph.entity_count()) return false;
  auto d = docs_.begin();
  for (const auto& [id, entity] : graph.entities()) {
    if (d->first != id || d->second.doc.page_content != entity.label ||
        d->second.doc.metadata != entity.attributes) {
      return false;
    }
    ++d;
  }
  return true;
}

}  // namespace erag
