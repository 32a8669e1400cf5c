#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace erag {

using AttributeValue = std::variant<bool, double, std::string>;
using AttributeMap = std::map<std::string, AttributeValue>;

/// Per-entity set of attribute names to expose when serializing.
using AttributeView = std::map<std::string, std::set<std::string>>;

std::string attribute_to_string(const AttributeValue& value);
nlohmann::json attribute_to_json(const AttributeValue& value);
AttributeValue attribute_from_json(const nlohmann::json& j);

struct Entity {
  std::string id;
  std::string label;
  AttributeMap attributes;
  std::int64_t last_updated = 0;

  bool operator==(const Entity&) const = default;
};

struct Edge {
  std::string id;
  std::string source;
  std::string target;
  std::vector<std::string> relations;

  bool operator==(const Edge&) const = default;
};

enum class ChangeKind { kAdded, kUpdated, kRemoved };

const char* to_string(ChangeKind kind);

struct EntityChange {
  ChangeKind kind = ChangeKind::kAdded;
  std::string entity_id;
  /// Sorted names of attributes whose value was added, removed or changed.
  std::vector<std::string> changed_attributes;
  bool label_changed = false;
  /// Edges dropped because this entity was removed.
  std::vector<std::string> removed_edges;
};

struct EdgeChange {
  ChangeKind kind = ChangeKind::kAdded;
  std::string edge_id;
};

struct GraphDelta {
  std::vector<EntityChange> entities;
  std::vector<EdgeChange> edges;

  bool empty() const { return entities.empty() && edges.empty(); }
  void append(GraphDelta other);
};

/// Time-varying scene graph. Value type: readers take a copy as their
/// snapshot while the single owner keeps mutating its instance.
class SceneGraph {
 public:
  SceneGraph() = default;

  std::int64_t tick() const { return tick_; }
  void set_tick(std::int64_t tick) { tick_ = tick; }

  GraphDelta upsert_entity(Entity entity);
  GraphDelta remove_entity(const std::string& entity_id);
  GraphDelta upsert_edge(Edge edge);
  GraphDelta remove_edge(const std::string& edge_id);

  const Entity* find_entity(const std::string& id) const;
  const Edge* find_edge(const std::string& id) const;
  bool contains(const std::string& id) const { return entities_.count(id) != 0; }

  const std::map<std::string, Entity>& entities() const { return entities_; }
  const std::map<std::string, Edge>& edges() const { return edges_; }
  std::size_t entity_count() const { return entities_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  /// Exactly the named entities (unknown ids dropped) and every edge whose
  /// endpoints are both named.
  SceneGraph induced_subgraph(const std::set<std::string>& node_ids) const;

  /// Canonical JSON. Entities without a view entry expose all attributes.
  std::string serialize(const AttributeView& view = {}) const;

  /// serialize() plus the graph tick; loadable with from_snapshot().
  std::string to_snapshot() const;
  static SceneGraph from_snapshot(const std::string& text);

  /// Content equality: ids, labels, attributes and edges. Ticks ignored.
  bool operator==(const SceneGraph& other) const;

 private:
  nlohmann::ordered_json to_json(const AttributeView& view) const;

  std::map<std::string, Entity> entities_;
  std::map<std::string, Edge> edges_;
  std::int64_t tick_ = 0;
};

}  // namespace erag
