#include "erag/scene_graph.hpp"

#include <algorithm>
#include <iterator>

#include "erag/errors.hpp"

namespace erag {

using nlohmann::json;
using nlohmann::ordered_json;

std::string attribute_to_string(const AttributeValue& value) {
  if (const auto* b = std::get_if<bool>(&value)) return *b ? "true" : "false";
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  return json(std::get<double>(value)).dump();
}

json attribute_to_json(const AttributeValue& value) {
  return std::visit([](const auto& v) { return json(v); }, value);
}

AttributeValue attribute_from_json(const json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw ValidationError("attribute value must be a boolean, number or string: " + j.dump());
}

const char* to_string(ChangeKind kind) {
  switch (kind) {
    case ChangeKind::kAdded:
      return "added";
    case ChangeKind::kUpdated:
      return "updated";
    case ChangeKind::kRemoved:
      return "removed";
  }
  return "unknown";
}

void GraphDelta::append(GraphDelta other) {
  std::move(other.entities.begin(), other.entities.end(), std::back_inserter(entities));
  std::move(other.edges.begin(), other.edges.end(), std::back_inserter(edges));
}

namespace {

std::vector<std::string> diff_attributes(const AttributeMap& before, const AttributeMap& after) {
  std::vector<std::string> changed;
  auto b = before.begin();
  auto a = after.begin();
  while (b != before.end() || a != after.end()) {
    if (a == after.end() || (b != before.end() && b->first < a->first)) {
      changed.push_back(b->first);
      ++b;
    } else if (b == before.end() || a->first < b->first) {
      changed.push_back(a->first);
      ++a;
    } else {
      if (b->second != a->second) changed.push_back(a->first);
      ++a;
      ++b;
    }
  }
  return changed;
}

}  // namespace

GraphDelta SceneGraph::upsert_entity(Entity entity) {
  if (entity.id.empty()) throw ValidationError("entity id must be nonempty");
  if (entity.label.empty()) throw ValidationError("entity '" + entity.id + "' has an empty label");
  entity.last_updated = tick_;

  EntityChange change;
  change.entity_id = entity.id;
  auto it = entities_.find(entity.id);
  if (it == entities_.end()) {
    change.kind = ChangeKind::kAdded;
    entities_.emplace(entity.id, std::move(entity));
  } else {
    change.kind = ChangeKind::kUpdated;
    change.changed_attributes = diff_attributes(it->second.attributes, entity.attributes);
    change.label_changed = it->second.label != entity.label;
    it->second = std::move(entity);
  }
  GraphDelta delta;
  delta.entities.push_back(std::move(change));
  return delta;
}

GraphDelta SceneGraph::remove_entity(const std::string& entity_id) {
  auto it = entities_.find(entity_id);
  if (it == entities_.end()) throw NotFoundError("no entity '" + entity_id + "'");

  GraphDelta delta;
  EntityChange change{ChangeKind::kRemoved, entity_id, {}, false, {}};
  for (auto e = edges_.begin(); e != edges_.end();) {
    if (e->second.source == entity_id || e->second.target == entity_id) {
      change.removed_edges.push_back(e->first);
      delta.edges.push_back({ChangeKind::kRemoved, e->first});
      e = edges_.erase(e);
    } else {
      ++e;
    }
  }
  entities_.erase(it);
  delta.entities.push_back(std::move(change));
  return delta;
}

GraphDelta SceneGraph::upsert_edge(Edge edge) {
  if (edge.id.empty()) throw ValidationError("edge id must be nonempty");
  if (edge.source == edge.target) throw ValidationError("edge '" + edge.id + "' is a self-loop");
  if (edge.relations.empty()) throw ValidationError("edge '" + edge.id + "' has no relations");
  if (!contains(edge.source) || !contains(edge.target)) {
    throw ValidationError("edge '" + edge.id + "' has a dangling endpoint");
  }
  GraphDelta delta;
  auto it = edges_.find(edge.id);
  if (it == edges_.end()) {
    delta.edges.push_back({ChangeKind::kAdded, edge.id});
    edges_.emplace(edge.id, std::move(edge));
  } else {
    if (it->second != edge) delta.edges.push_back({ChangeKind::kUpdated, edge.id});
    it->second = std::move(edge);
  }
  return delta;
}

GraphDelta SceneGraph::remove_edge(const std::string& edge_id) {
  if (edges_.erase(edge_id) == 0) throw NotFoundError("no edge '" + edge_id + "'");
  GraphDelta delta;
  delta.edges.push_back({ChangeKind::kRemoved, edge_id});
  return delta;
}

const Entity* SceneGraph::find_entity(const std::string& id) const {
  auto it = entities_.find(id);
  return it == entities_.end() ? nullptr : &it->second;
}

const Edge* SceneGraph::find_edge(const std::string& id) const {
  auto it = edges_.find(id);
  return it == edges_.end() ? nullptr : &it->second;
}

SceneGraph SceneGraph::induced_subgraph(const std::set<std::string>& node_ids) const {
  SceneGraph out;
  out.tick_ = tick_;
  for (const auto& id : node_ids) {
    if (auto it = entities_.find(id); it != entities_.end()) out.entities_.emplace(id, it->second);
  }
  for (const auto& [id, edge] : edges_) {
    if (out.contains(edge.source) && out.contains(edge.target)) out.edges_.emplace(id, edge);
  }
  return out;
}

ordered_json SceneGraph::to_json(const AttributeView& view) const {
  ordered_json entities = ordered_json::array();
  for (const auto& [id, entity] : entities_) {
    ordered_json attrs = ordered_json::object();
    auto v = view.find(id);
    for (const auto& [name, value] : entity.attributes) {
      if (v != view.end() && v->second.count(name) == 0) continue;
      attrs[name] = attribute_to_json(value);
    }
    entities.push_back({{"id", id}, {"label", entity.label}, {"attributes", std::move(attrs)}});
  }
  ordered_json edges = ordered_json::array();
  for (const auto& [id, edge] : edges_) {
    edges.push_back({{"id", id},
                     {"source", edge.source},
                     {"target", edge.target},
                     {"relations", edge.relations}});
  }
  ordered_json out = ordered_json::object();
  out["entities"] = std::move(entities);
  out["edges"] = std::move(edges);
  return out;
}

std::string SceneGraph::serialize(const AttributeView& view) const { return to_json(view).dump(); }

std::string SceneGraph::to_snapshot() const {
  ordered_json out = ordered_json::object();
  out["tick"] = tick_;
  const ordered_json body = to_json({});
  for (const auto& [key, value] : body.items()) out[key] = value;
  return out.dump();
}

SceneGraph SceneGraph::from_snapshot(const std::string& text) {
  try {
    const json j = json::parse(text);
    SceneGraph graph;
    graph.tick_ = j.value("tick", std::int64_t{0});
    for (const auto& e : j.at("entities")) {
      Entity entity{e.at("id").get<std::string>(), e.at("label").get<std::string>(), {}, 0};
      const json attributes = e.value("attributes", json::object());
      for (const auto& [name, value] : attributes.items()) {
        entity.attributes.emplace(name, attribute_from_json(value));
      }
      graph.upsert_entity(std::move(entity));
    }
    for (const auto& e : j.at("edges")) {
      graph.upsert_edge({e.at("id").get<std::string>(), e.at("source").get<std::string>(),
                         e.at("target").get<std::string>(),
                         e.at("relations").get<std::vector<std::string>>()});
    }
    return graph;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed scene snapshot: ") + e.what());
  }
}

bool SceneGraph::operator==(const SceneGraph& other) const {
  if (edges_ != other.edges_ || entities_.size() != other.entities_.size()) return false;
  return std::equal(entities_.begin(), entities_.end(), other.entities_.begin(),
                    [](const auto& a, const auto& b) {
                      return a.first == b.first && a.second.label == b.second.label &&
                             a.second.attributes == b.second.attributes;
                    });
}

}  // namespace erag
