#include "erag/simulator.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "erag/errors.hpp"

namespace erag::sim {
namespace {

const std::string kHot = "Hot";
const std::string kCold = "Cold";
const std::string kRoomTemp = "RoomTemp";

std::string normalize_name(std::string_view text) {
  std::string out;
  bool space = false;
  for (unsigned char c : text) {
    if (std::isspace(c) || c == '_') {
      space = !out.empty();
      continue;
    }
    if (c == '"' || c == '\'' || c == '(' || c == ')' || c == '[' || c == ']') continue;
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  for (const char* article : {"the ", "a ", "an "}) {
    const std::string a = article;
    if (out.rfind(a, 0) == 0) return out.substr(a.size());
  }
  return out;
}

std::string lower(std::string text) {
  for (char& c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return text;
}

ActionResult fail(std::string message) { return {false, std::move(message), {}, {}}; }
ActionResult succeed(std::string message) { return {true, std::move(message), {}, {}}; }

}  // namespace

const std::vector<std::string>& action_names() {
  static const std::vector<std::string> names = {
      "randomlyexplore", "getdiscoveredobjects", "getvisibleobjects", "moveto",
      "inspect",         "pickup",               "placeon",           "open",
      "close",           "toggleon",             "toggleoff",         "search",
      "fillheldobjectwithwater", "pourwaterinto", "adjustpositioning"};
  return names;
}

bool action_takes_argument(const std::string& action) {
  return action != "randomlyexplore" && action != "getdiscoveredobjects" &&
         action != "getvisibleobjects" && action != "fillheldobjectwithwater" &&
         action != "adjustpositioning";
}

World::World(const Scene& scene, std::uint64_t seed)
    : scene_id_(scene.id), rooms_(scene.rooms), adjacency_hints_(scene.adjacency_hints), rng_(seed) {
  for (const auto& o : scene.objects) objects_.emplace(o.id, o);
  for (const auto& [id, o] : objects_) {
    std::size_t depth = 0;
    for (auto p = o.parent; p; p = obj(*p).parent) {
      if (++depth > objects_.size()) throw ValidationError("containment cycle at '" + id + "'");
    }
  }
  for (const auto& w : scene.water_sources) basin_faucet_[w.basin] = w.faucet;
  for (const auto& d : scene.distractors) {
    distractors_.emplace(d.id, d);
    discovered_.insert(d.id);
  }

  explore_order_ = rooms_;
  std::mt19937_64 order_rng(seed ^ 0x5bd1e995ull);
  for (std::size_t i = explore_order_.size(); i > 1; --i) {
    std::swap(explore_order_[i - 1], explore_order_[order_rng() % i]);
  }

  agent_.room = rooms_.front();
  discover_room(agent_.room);
  // Settle the initial state so that a fresh world is a dynamics fixpoint.
  dynamics_tick();
  tick_ = 0;
}

// ---------------------------------------------------------------------------
// Geometry helpers

std::string World::reach_point(const std::string& id) const {
  if (auto hint = adjacency_hints_.find(id); hint != adjacency_hints_.end()) return hint->second;
  std::string cur = id;
  while (obj(cur).parent) cur = *obj(cur).parent;
  if (auto hint = adjacency_hints_.find(cur); hint != adjacency_hints_.end()) return hint->second;
  return cur;
}

bool World::hidden(const std::string& id) const {
  for (auto p = obj(id).parent; p; p = obj(*p).parent) {
    const SimObject& container = obj(*p);
    if (container.flag("openable") && !container.flag("isOpen")) return true;
  }
  return false;
}

bool World::descends_from(const std::string& id, const std::string& ancestor) const {
  for (auto p = obj(id).parent; p; p = obj(*p).parent) {
    if (*p == ancestor) return true;
  }
  return false;
}

bool World::adjacent(const std::string& id) const {
  if (agent_.held && (*agent_.held == id || descends_from(id, *agent_.held))) return true;
  return agent_.near && reach_point(id) == *agent_.near && obj(id).room == agent_.room;
}

bool World::visible(const std::string& id) const {
  if (agent_.held && (*agent_.held == id || descends_from(id, *agent_.held))) return true;
  return obj(id).room == agent_.room && !hidden(id);
}

int World::distance_class(const std::string& id) const {
  if (adjacent(id)) return 0;
  if (obj(id).room == agent_.room) return 1;
  return 2;
}

std::vector<std::string> World::children(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& [cid, o] : objects_) {
    if (o.parent && *o.parent == id) out.push_back(cid);
  }
  return out;
}

void World::discover_room(const std::string& room) {
  for (const auto& [id, o] : objects_) {
    if (o.room == room && !hidden(id)) discovered_.insert(id);
  }
}

void World::move_agent_to_room(const std::string& room) {
  agent_.room = room;
  if (agent_.held) {
    std::vector<std::string> stack{*agent_.held};
    while (!stack.empty()) {
      const std::string id = stack.back();
      stack.pop_back();
      obj(id).room = room;
      for (auto& c : children(id)) stack.push_back(std::move(c));
    }
  }
  discover_room(room);
}

std::vector<std::string> World::visible_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, o] : objects_) {
    if (visible(id)) out.push_back(id);
  }
  return out;
}

AttributeMap World::observed_attributes(const SimObject& o) const {
  AttributeMap attrs = o.attributes;
  const bool is_visible = visible(o.id);
  attrs["visible"] = is_visible;
  attrs["isInteractable"] = is_visible && adjacent(o.id);
  attrs["isPickedUp"] = agent_.held && *agent_.held == o.id;
  attrs["distance"] = static_cast<double>(distance_class(o.id));
  attrs["openness"] = o.flag("isOpen") ? 1.0 : 0.0;
  return attrs;
}

// ---------------------------------------------------------------------------
// Argument resolution

std::optional<std::string> World::resolve(const std::string& argument, std::string* error) const {
  const std::string raw = lower(std::string(argument));
  const std::string name = normalize_name(argument);
  if (name.empty()) {
    *error = "this action needs an object argument";
    return std::nullopt;
  }
  // Exact id, tolerating surrounding quotes/whitespace.
  for (const std::string& candidate : {raw, name}) {
    std::string id = candidate;
    std::replace(id.begin(), id.end(), ' ', '_');
    if (objects_.count(id)) {
      if (discovered_.count(id)) return id;
      *error = "no discovered object matches '" + argument + "'";
      return std::nullopt;
    }
    if (distractors_.count(id)) {
      *error = "object not found in environment: '" + argument + "'";
      return std::nullopt;
    }
  }
  std::optional<std::string> best;
  int best_dist = 0;
  for (const auto& id : discovered_) {
    auto it = objects_.find(id);
    if (it == objects_.end() || normalize_name(it->second.label) != name) continue;
    const int d = distance_class(id);
    if (!best || d < best_dist) {  // discovered_ is ordered, so ties keep the smaller id
      best = id;
      best_dist = d;
    }
  }
  if (best) return best;
  for (const auto& [id, d] : distractors_) {
    if (normalize_name(d.label) == name) {
      *error = "object not found in environment: '" + argument + "'";
      return std::nullopt;
    }
  }
  *error = "no discovered object matches '" + argument + "'";
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Actions

ActionResult World::step(const std::string& action, const std::string& argument) {
  ActionResult result = act(action, argument);
  ++tick_;
  result.visible_ids = visible_ids();
  return result;
}

ActionResult World::act(const std::string& action, const std::string& argument) {
  const auto& names = action_names();
  if (std::find(names.begin(), names.end(), action) == names.end()) {
    return fail("unknown action '" + action + "'");
  }

  if (action == "randomlyexplore") {
    if (rooms_.size() < 2) {
      discover_room(agent_.room);
      agent_.near.reset();
      return succeed("You looked around the " + agent_.room + ".");
    }
    std::string room;
    do {
      room = explore_order_[explore_next_ % explore_order_.size()];
      ++explore_next_;
    } while (room == agent_.room);
    agent_.near.reset();
    move_agent_to_room(room);
    return succeed("You explored and arrived in the " + room + ".");
  }
  if (action == "getvisibleobjects") {
    ActionResult r = succeed("Visible objects:");
    r.listed_ids = visible_ids();
    return r;
  }
  if (action == "getdiscoveredobjects") {
    ActionResult r = succeed("Discovered objects:");
    r.listed_ids.assign(discovered_.begin(), discovered_.end());
    return r;
  }
  if (action == "adjustpositioning") {
    std::vector<std::string> roots;
    for (const auto& [id, o] : objects_) {
      if (o.room == agent_.room && !o.parent && !(agent_.held && *agent_.held == id)) {
        roots.push_back(id);
      }
    }
    if (roots.empty()) return fail("There is nothing to position yourself next to.");
    agent_.near = roots[rng_() % roots.size()];
    return succeed("You adjusted your position and are now next to the " + obj(*agent_.near).label +
                   ".");
  }
  if (action == "fillheldobjectwithwater") {
    if (!agent_.held) return fail("You are not holding anything.");
    SimObject& held = obj(*agent_.held);
    if (!held.flag("canFillWithLiquid")) return fail("The " + held.label + " cannot hold water.");
    for (const auto& [basin, faucet] : basin_faucet_) {
      if (!agent_.near || reach_point(basin) != *agent_.near || obj(basin).room != agent_.room) {
        continue;
      }
      if (!obj(faucet).flag("isToggled")) return fail("The faucet is turned off.");
      held.attributes["isFilledWithLiquid"] = true;
      held.attributes["fillLiquid"] = std::string("water");
      return succeed("You filled the " + held.label + " with water.");
    }
    return fail("You are not next to a water source.");
  }

  std::string error;
  const auto target_id = resolve(argument, &error);
  if (!target_id) return fail(error);
  SimObject& target = obj(*target_id);
  const std::string& label = target.label;

  if (action == "inspect") {
    std::ostringstream ss;
    ss << "The " << label << " has:";
    bool first = true;
    for (const auto& [name, value] : observed_attributes(target)) {
      ss << (first ? " " : ", ") << name << "=" << attribute_to_string(value);
      first = false;
    }
    ss << ".";
    return succeed(ss.str());
  }
  if (action == "moveto") {
    if (agent_.held && *agent_.held == *target_id) return fail("You are holding the " + label + ".");
    agent_.near = reach_point(*target_id);
    move_agent_to_room(target.room);
    return succeed("You moved next to the " + label + ".");
  }

  if (!adjacent(*target_id)) return fail("The " + label + " is not close enough.");
  const bool held_target = agent_.held && *agent_.held == *target_id;
  if (hidden(*target_id) && !held_target) return fail("The " + label + " is inside something closed.");

  if (action == "search") {
    if (!target.receptacle) return fail("The " + label + " cannot be searched.");
    if (target.flag("openable") && !target.flag("isOpen")) return fail("The " + label + " is closed.");
    ActionResult r = succeed("Searching the " + label + " you find:");
    std::vector<std::string> stack = children(*target_id);
    std::set<std::string> found;
    while (!stack.empty()) {
      const std::string id = stack.back();
      stack.pop_back();
      if (hidden(id)) continue;
      discovered_.insert(id);
      found.insert(id);
      for (auto& c : children(id)) stack.push_back(std::move(c));
    }
    r.listed_ids.assign(found.begin(), found.end());
    if (found.empty()) r.message = "The " + label + " is empty.";
    return r;
  }
  if (action == "pickup") {
    if (agent_.held) return fail("You are already holding the " + obj(*agent_.held).label + ".");
    if (!target.flag("pickupable")) return fail("The " + label + " cannot be picked up.");
    target.parent.reset();
    agent_.held = *target_id;
    return succeed("You picked up the " + label + ".");
  }
  if (action == "placeon") {
    if (!agent_.held) return fail("You are not holding anything.");
    if (held_target || descends_from(*target_id, *agent_.held)) {
      return fail("You cannot place an object on itself.");
    }
    if (!target.receptacle) return fail("You cannot place objects on the " + label + ".");
    if (target.flag("openable") && !target.flag("isOpen")) return fail("The " + label + " is closed.");
    SimObject& held = obj(*agent_.held);
    held.parent = *target_id;
    held.relation = *target.receptacle;
    const std::string held_label = held.label;
    agent_.held.reset();
    return succeed("You placed the " + held_label + " " + to_string(*target.receptacle) + " the " +
                   label + ".");
  }
  if (action == "open" || action == "close") {
    const bool opening = action == "open";
    if (!target.flag("openable")) return fail("The " + label + " cannot be opened or closed.");
    if (target.flag("isOpen") == opening) {
      return fail("The " + label + " is already " + (opening ? "open." : "closed."));
    }
    if (opening && target.flag("toggleable") && target.flag("isToggled")) {
      return fail("Turn the " + label + " off before opening it.");
    }
    target.attributes["isOpen"] = opening;
    target.attributes["openness"] = opening ? 1.0 : 0.0;
    return succeed(std::string("You ") + (opening ? "opened" : "closed") + " the " + label + ".");
  }
  if (action == "toggleon" || action == "toggleoff") {
    const bool on = action == "toggleon";
    if (!target.flag("toggleable")) return fail("The " + label + " cannot be turned on or off.");
    if (target.flag("isToggled") == on) {
      return fail("The " + label + " is already " + (on ? "on." : "off."));
    }
    if (on && target.flag("openable") && target.flag("isOpen")) {
      return fail("Close the " + label + " before turning it on.");
    }
    target.attributes["isToggled"] = on;
    return succeed("You turned the " + label + (on ? " on." : " off."));
  }
  if (action == "pourwaterinto") {
    if (!agent_.held) return fail("You are not holding anything.");
    SimObject& held = obj(*agent_.held);
    if (!held.flag("isFilledWithLiquid")) return fail("The " + held.label + " holds no water.");
    if (held_target) return fail("You cannot pour the " + label + " into itself.");
    if (!target.flag("canFillWithLiquid")) return fail("The " + label + " cannot hold water.");
    target.attributes["isFilledWithLiquid"] = true;
    target.attributes["fillLiquid"] = held.attributes["fillLiquid"];
    held.attributes["isFilledWithLiquid"] = false;
    held.attributes["fillLiquid"] = std::string("None");
    return succeed("You poured water into the " + label + ".");
  }
  return fail("unknown action '" + action + "'");
}

// ---------------------------------------------------------------------------
// Dynamics

void World::dynamics_tick() {
  for (const auto& [basin, faucet] : basin_faucet_) {
    if (!obj(faucet).flag("isToggled")) continue;
    for (const auto& id : children(basin)) {
      SimObject& o = obj(id);
      if (o.flag("canFillWithLiquid") && !o.flag("isFilledWithLiquid")) {
        o.attributes["isFilledWithLiquid"] = true;
        o.attributes["fillLiquid"] = std::string("water");
      }
    }
  }

  auto active_heat = [&](const SimObject& o) { return o.flag("isHeatSource") && o.flag("isToggled"); };
  // Parents before children is not guaranteed by id order, so memoize.
  std::map<std::string, bool> heated;
  auto is_heated = [&](const std::string& id, auto&& self) -> bool {
    if (auto it = heated.find(id); it != heated.end()) return it->second;
    const auto& parent = obj(id).parent;
    bool h = false;
    if (parent) h = active_heat(obj(*parent)) || self(*parent, self);
    heated[id] = h;
    return h;
  };

  for (auto& [id, o] : objects_) {
    if (o.flag("isHeatSource")) {
      o.attributes["temperature"] = o.flag("isToggled") ? kHot : kRoomTemp;
    }
    if (is_heated(id, is_heated)) {
      o.attributes["temperature"] = kHot;
      if (o.flag("cookable")) o.attributes["isCooked"] = true;
      continue;
    }
    for (auto p = o.parent; p; p = obj(*p).parent) {
      const SimObject& c = obj(*p);
      if (c.flag("isColdSource") && c.flag("openable") && !c.flag("isOpen")) {
        o.attributes["temperature"] = kCold;
        break;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Goals

bool World::class_matches(const SimObject& o, const std::string& pattern) const {
  if (pattern == "*") return true;
  const std::string label = normalize_name(o.label);
  std::size_t start = 0;
  while (start <= pattern.size()) {
    auto end = pattern.find('|', start);
    if (end == std::string::npos) end = pattern.size();
    if (normalize_name(pattern.substr(start, end - start)) == label) return true;
    start = end + 1;
  }
  return false;
}

bool World::predicate_holds(const GoalPredicate& p) const {
  auto satisfies = [&](const SimObject& o) {
    if (p.kind == GoalPredicate::Kind::kAttribute) {
      auto it = o.attributes.find(p.attribute);
      const AttributeValue actual =
          it != o.attributes.end() ? it->second : observed_attributes(o).at(p.attribute);
      return actual == p.value;
    }
    return o.parent && o.relation == p.relation && class_matches(obj(*o.parent), p.target);
  };

  bool result;
  if (p.quantifier == Quantifier::kExists) {
    result = std::any_of(objects_.begin(), objects_.end(), [&](const auto& kv) {
      return class_matches(kv.second, p.subject) && satisfies(kv.second);
    });
  } else {
    result = std::all_of(objects_.begin(), objects_.end(), [&](const auto& kv) {
      if (!discovered_.count(kv.first) || !class_matches(kv.second, p.subject)) return true;
      return satisfies(kv.second);
    });
  }
  return p.negated ? !result : result;
}

bool World::check_goal(const GoalSpec& goal) const {
  return std::all_of(goal.all_of.begin(), goal.all_of.end(),
                     [&](const GoalPredicate& p) { return predicate_holds(p); });
}

// ---------------------------------------------------------------------------
// Graph mirror

SceneGraph World::rebuild_graph() const {
  SceneGraph graph;
  graph.set_tick(tick_);
  for (const auto& id : discovered_) {
    if (auto d = distractors_.find(id); d != distractors_.end()) {
      graph.upsert_entity(d->second);
      continue;
    }
    const SimObject& o = obj(id);
    graph.upsert_entity({id, o.label, observed_attributes(o), tick_});
  }
  for (const auto& id : discovered_) {
    auto it = objects_.find(id);
    if (it == objects_.end() || !it->second.parent || !discovered_.count(*it->second.parent)) continue;
    const SimObject& o = it->second;
    graph.upsert_edge({id + "|" + to_string(o.relation) + "|" + *o.parent, id, *o.parent,
                       {to_string(o.relation)}});
  }
  for (const auto& [basin, faucet] : basin_faucet_) {
    if (discovered_.count(basin) && discovered_.count(faucet)) {
      graph.upsert_edge({faucet + "|controls|" + basin, faucet, basin, {"controls"}});
    }
  }
  return graph;
}

GraphDelta World::observe_graph(SceneGraph& graph) const {
  const SceneGraph target = rebuild_graph();
  graph.set_tick(tick_);
  GraphDelta delta;

  std::vector<std::string> stale_edges;
  for (const auto& [id, edge] : graph.edges()) {
    const Edge* want = target.find_edge(id);
    if (want == nullptr || *want != edge) stale_edges.push_back(id);
  }
  for (const auto& id : stale_edges) delta.append(graph.remove_edge(id));

  std::vector<std::string> stale_entities;
  for (const auto& [id, entity] : graph.entities()) {
    if (!target.contains(id)) stale_entities.push_back(id);
  }
  for (const auto& id : stale_entities) delta.append(graph.remove_entity(id));

  for (const auto& [id, entity] : target.entities()) {
    const Entity* have = graph.find_entity(id);
    if (have != nullptr && have->label == entity.label && have->attributes == entity.attributes) {
      continue;
    }
    delta.append(graph.upsert_entity(entity));
  }
  for (const auto& [id, edge] : target.edges()) {
    if (graph.find_edge(id) == nullptr) delta.append(graph.upsert_edge(edge));
  }
  return delta;
}

// ---------------------------------------------------------------------------
// Invariants

std::string World::invariant_violation() const {
  static const std::vector<std::pair<std::string, std::string>> kImplications = {
      {"isToggled", "toggleable"},
      {"isOpen", "openable"},
      {"isFilledWithLiquid", "canFillWithLiquid"},
      {"isCooked", "cookable"}};
  std::size_t picked = 0;
  for (const auto& [id, o] : objects_) {
    for (const auto& [state, capability] : kImplications) {
      if (o.flag(state) && !o.flag(capability)) return id + ": " + state + " without " + capability;
    }
    if (agent_.held && *agent_.held == id) ++picked;
    std::size_t depth = 0;
    for (auto p = o.parent; p; p = obj(*p).parent) {
      if (++depth > objects_.size()) return id + ": containment cycle";
    }
  }
  if (picked > 1) return "more than one object is picked up";
  if (agent_.held) {
    const SimObject& held = obj(*agent_.held);
    if (held.parent) return *agent_.held + ": held object still has a parent";
  }
  return {};
}

}  // namespace erag::sim
