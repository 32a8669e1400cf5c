// Scene, goal and distractor loading for the household simulator.

#include <algorithm>
#include <fstream>

#include "erag/errors.hpp"
#include "erag/simulator.hpp"

namespace erag::sim {

using nlohmann::json;

const char* to_string(Relation relation) { return relation == Relation::kOn ? "on" : "in"; }

Relation relation_from_string(const std::string& text) {
  if (text == "on") return Relation::kOn;
  if (text == "in") return Relation::kIn;
  throw ValidationError("unknown relation '" + text + "'");
}

bool SimObject::flag(const std::string& name) const {
  auto it = attributes.find(name);
  if (it == attributes.end()) return false;
  const bool* b = std::get_if<bool>(&it->second);
  return b != nullptr && *b;
}

namespace {

AttributeValue catalog_default(const std::string& name) {
  if (name == "temperature") return std::string("RoomTemp");
  if (name == "fillLiquid" || name == "salientMaterials") return std::string("None");
  if (name == "openness" || name == "distance") return 0.0;
  return false;
}

void check_catalog_name(const std::string& name, const std::string& where) {
  const auto& catalog = household_attribute_catalog();
  if (std::find(catalog.begin(), catalog.end(), name) == catalog.end()) {
    throw ValidationError(where + ": '" + name + "' is not a catalog attribute");
  }
}

void merge_attributes(AttributeMap& into, const json& j, const std::string& where) {
  for (const auto& [name, value] : j.items()) {
    check_catalog_name(name, where);
    into[name] = attribute_from_json(value);
  }
}

std::string snake(const std::string& label) {
  std::string out = label;
  std::replace(out.begin(), out.end(), ' ', '_');
  return out;
}

}  // namespace

Scene scene_from_json(const json& j) {
  Scene scene;
  scene.id = j.at("id").get<std::string>();
  scene.rooms = j.at("rooms").get<std::vector<std::string>>();
  if (scene.rooms.empty()) throw ValidationError("scene '" + scene.id + "' has no rooms");

  const json class_defaults = j.value("class_defaults", json::object());
  const json receptacles = j.value("receptacles", json::object());

  std::map<std::string, std::size_t> index;
  for (const auto& o : j.at("objects")) {
    SimObject obj;
    obj.id = o.at("id").get<std::string>();
    obj.label = o.at("class").get<std::string>();
    if (obj.id.empty() || obj.label.empty()) throw ValidationError("scene object needs id and class");
    if (index.count(obj.id)) throw ValidationError("duplicate object id '" + obj.id + "'");
    obj.room = o.value("room", "");
    if (o.contains("parent") && !o.at("parent").is_null()) {
      obj.parent = o.at("parent").get<std::string>();
      obj.relation = relation_from_string(o.value("relation", "on"));
    }
    if (o.contains("receptacle")) {
      if (!o.at("receptacle").is_null()) {
        obj.receptacle = relation_from_string(o.at("receptacle").get<std::string>());
      }
    } else if (receptacles.contains(obj.label)) {
      obj.receptacle = relation_from_string(receptacles.at(obj.label).get<std::string>());
    }
    for (const auto& name : household_attribute_catalog()) obj.attributes[name] = catalog_default(name);
    if (class_defaults.contains(obj.label)) {
      merge_attributes(obj.attributes, class_defaults.at(obj.label), "class '" + obj.label + "'");
    }
    merge_attributes(obj.attributes, o.value("attributes", json::object()), "object '" + obj.id + "'");
    index[obj.id] = scene.objects.size();
    scene.objects.push_back(std::move(obj));
  }

  // Children inherit the room of their parent; resolve in dependency order.
  for (bool progress = true; progress;) {
    progress = false;
    for (auto& obj : scene.objects) {
      if (!obj.room.empty()) continue;
      if (!obj.parent) throw ValidationError("top-level object '" + obj.id + "' has no room");
      auto p = index.find(*obj.parent);
      if (p == index.end()) throw ValidationError("object '" + obj.id + "' has unknown parent");
      if (!scene.objects[p->second].room.empty()) {
        obj.room = scene.objects[p->second].room;
        progress = true;
      }
    }
  }
  for (const auto& obj : scene.objects) {
    if (obj.room.empty()) throw ValidationError("containment cycle around '" + obj.id + "'");
    if (std::find(scene.rooms.begin(), scene.rooms.end(), obj.room) == scene.rooms.end()) {
      throw ValidationError("object '" + obj.id + "' is in unknown room '" + obj.room + "'");
    }
    if (obj.parent && !index.count(*obj.parent)) {
      throw ValidationError("object '" + obj.id + "' has unknown parent '" + *obj.parent + "'");
    }
  }

  for (const auto& w : j.value("water_sources", json::array())) {
    WaterSource ws{w.at("faucet").get<std::string>(), w.at("basin").get<std::string>()};
    if (!index.count(ws.faucet) || !index.count(ws.basin)) {
      throw ValidationError("water source references unknown objects");
    }
    scene.water_sources.push_back(std::move(ws));
  }
  scene.adjacency_hints =
      j.value("adjacency_hints", json::object()).get<std::map<std::string, std::string>>();
  scene.distractor_vocabulary = j.value("distractor_vocabulary", std::vector<std::string>{});
  for (const auto& d : j.value("distractors", json::array())) {
    Entity e{d.at("id").get<std::string>(), d.at("label").get<std::string>(), {}, 0};
    merge_attributes(e.attributes, d.value("attributes", json::object()), "distractor '" + e.id + "'");
    scene.distractors.push_back(std::move(e));
  }
  return scene;
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open scene file '" + path + "'");
  try {
    return scene_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ValidationError("scene file '" + path + "': " + e.what());
  }
}

Scene inject_distractors(Scene scene, std::size_t n, std::uint64_t seed) {
  if (n == 0) return scene;
  static const std::vector<std::string> kFallbackVocabulary = {"ladder", "truss", "duck"};
  static const std::vector<std::string> kMaterials = {"Metal", "Wood", "Plastic", "Fabric",
                                                      "Stone", "Rubber", "Paper"};
  const auto& vocab =
      scene.distractor_vocabulary.empty() ? kFallbackVocabulary : scene.distractor_vocabulary;

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::set<std::string> taken;
  for (const auto& o : scene.objects) taken.insert(o.id);
  for (const auto& d : scene.distractors) taken.insert(d.id);

  std::size_t serial = scene.distractors.size() + 100;
  for (std::size_t i = 0; i < n; ++i) {
    Entity e;
    e.label = vocab[rng() % vocab.size()];
    do {
      e.id = snake(e.label) + "_" + std::to_string(serial++);
    } while (taken.count(e.id));
    taken.insert(e.id);
    for (const auto& name : household_attribute_catalog()) e.attributes[name] = catalog_default(name);
    e.attributes["moveable"] = static_cast<bool>(rng() & 1u);
    e.attributes["pickupable"] = static_cast<bool>(rng() & 1u);
    e.attributes["breakable"] = static_cast<bool>(rng() & 1u);
    e.attributes["salientMaterials"] = kMaterials[rng() % kMaterials.size()];
    e.attributes["distance"] = 3.0 + static_cast<double>(rng() % 120) / 10.0;
    scene.distractors.push_back(std::move(e));
  }
  return scene;
}

namespace {

GoalPredicate predicate_from_json(const json& j) {
  GoalPredicate p;
  p.negated = j.value("negated", false);
  const std::string q = j.value("quantifier", "exists");
  if (q == "exists") {
    p.quantifier = Quantifier::kExists;
  } else if (q == "forall-discovered") {
    p.quantifier = Quantifier::kForallDiscovered;
  } else {
    throw ValidationError("unknown goal quantifier '" + q + "'");
  }
  p.subject = j.at("subject").get<std::string>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "relation") {
    p.kind = GoalPredicate::Kind::kRelation;
    p.relation = relation_from_string(j.at("relation").get<std::string>());
    p.target = j.at("target").get<std::string>();
  } else if (kind == "attribute") {
    p.kind = GoalPredicate::Kind::kAttribute;
    p.attribute = j.at("attribute").get<std::string>();
    check_catalog_name(p.attribute, "goal predicate");
    p.value = attribute_from_json(j.at("value"));
  } else {
    throw ValidationError("unknown goal predicate kind '" + kind + "'");
  }
  return p;
}

}  // namespace

GoalSpec goal_from_json(const json& j) {
  GoalSpec goal;
  const json& preds = j.is_array() ? j : j.at("all_of");
  for (const auto& p : preds) goal.all_of.push_back(predicate_from_json(p));
  return goal;
}

}  // namespace erag::sim
