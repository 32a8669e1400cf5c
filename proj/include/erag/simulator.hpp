#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "erag/catalog.hpp"
#include "erag/scene_graph.hpp"

namespace erag::sim {

enum class Relation { kOn, kIn };

const char* to_string(Relation relation);
Relation relation_from_string(const std::string& text);

struct SimObject {
  std::string id;
  std::string label;
  std::string room;
  std::optional<std::string> parent;
  Relation relation = Relation::kOn;  // meaningful only with a parent
  /// Relation an object gets when placed onto this one; nullopt when this
  /// object is not a receptacle.
  std::optional<Relation> receptacle;
  /// Values for the full attribute catalog.
  AttributeMap attributes;

  bool flag(const std::string& name) const;
};

struct WaterSource {
  std::string faucet;
  std::string basin;
};

struct Scene {
  std::string id;
  std::vector<std::string> rooms;  // first entry is the start room
  std::vector<SimObject> objects;
  std::vector<WaterSource> water_sources;
  /// Object id -> id of the object the agent stands next to when it moves to
  /// that object. Defaults to the object's top-level ancestor.
  std::map<std::string, std::string> adjacency_hints;
  std::vector<std::string> distractor_vocabulary;
  /// Graph-only phantom entities; they cannot be interacted with.
  std::vector<Entity> distractors;
};

Scene scene_from_json(const nlohmann::json& j);
Scene load_scene(const std::string& path);

/// Adds `n` phantom entities labelled from the scene's distractor vocabulary.
/// Deterministic in (scene, n, seed).
Scene inject_distractors(Scene scene, std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Goals

enum class Quantifier { kExists, kForallDiscovered };

/// Class patterns are a label, "a|b" alternatives, or "*" for any object.
struct GoalPredicate {
  enum class Kind { kRelation, kAttribute };

  Kind kind = Kind::kRelation;
  bool negated = false;
  Quantifier quantifier = Quantifier::kExists;
  std::string subject;
  Relation relation = Relation::kOn;
  std::string target;
  std::string attribute;
  AttributeValue value;
};

struct GoalSpec {
  std::vector<GoalPredicate> all_of;
};

GoalSpec goal_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Actions

struct ActionResult {
  bool ok = false;
  std::string message;
  /// Object ids the action enumerates (getvisibleobjects, search, ...). They
  /// are rendered by the caller after the message.
  std::vector<std::string> listed_ids;
  std::vector<std::string> visible_ids;
};

struct AgentState {
  std::string room;
  std::optional<std::string> held;
  /// Object the agent currently stands next to.
  std::optional<std::string> near;
};

/// The 15 actions available to the planner.
const std::vector<std::string>& action_names();
/// Actions that take no object argument.
bool action_takes_argument(const std::string& action);

/// Deterministic household world with partial observability.
///
/// Dynamics rules, applied by dynamics_tick():
///  - water: a toggled-on faucet fills every canFillWithLiquid object
///    directly in its basin;
///  - heat: an object whose parent is a toggled-on heat source, or is itself
///    heated, becomes Hot, and cookable heated objects become cooked;
///    toggled-on heat sources are Hot themselves and back to RoomTemp when
///    off;
///  - cold: objects anywhere inside a closed cold source become Cold.
class World {
 public:
  World(const Scene& scene, std::uint64_t seed);

  ActionResult step(const std::string& action, const std::string& argument);
  void dynamics_tick();
  bool check_goal(const GoalSpec& goal) const;

  /// Brings `graph` in line with the discovered world and returns the delta.
  GraphDelta observe_graph(SceneGraph& graph) const;
  /// The graph observe_graph() converges to, built from scratch.
  SceneGraph rebuild_graph() const;

  /// Empty when every invariant holds, otherwise a description of the first
  /// violation.
  std::string invariant_violation() const;

  const std::map<std::string, SimObject>& objects() const { return objects_; }
  const std::set<std::string>& discovered() const { return discovered_; }
  const AgentState& agent() const { return agent_; }
  std::int64_t tick() const { return tick_; }
  const std::string& scene_id() const { return scene_id_; }

  /// Attribute values including the observer-dependent ones (visible,
  /// isInteractable, isPickedUp, distance, openness).
  AttributeMap observed_attributes(const SimObject& obj) const;

  /// Resolves an id or class name to a discovered object. Returns nullopt
  /// and sets `error` on failure.
  std::optional<std::string> resolve(const std::string& argument, std::string* error) const;

 private:
  const SimObject& obj(const std::string& id) const { return objects_.at(id); }
  SimObject& obj(const std::string& id) { return objects_.at(id); }

  std::string reach_point(const std::string& id) const;
  bool hidden(const std::string& id) const;
  bool adjacent(const std::string& id) const;
  bool visible(const std::string& id) const;
  int distance_class(const std::string& id) const;
  bool descends_from(const std::string& id, const std::string& ancestor) const;
  std::vector<std::string> children(const std::string& id) const;
  void discover_room(const std::string& room);
  void move_agent_to_room(const std::string& room);
  std::vector<std::string> visible_ids() const;
  bool class_matches(const SimObject& o, const std::string& pattern) const;
  bool predicate_holds(const GoalPredicate& p) const;

  ActionResult act(const std::string& action, const std::string& argument);

  std::string scene_id_;
  std::vector<std::string> rooms_;
  std::map<std::string, SimObject> objects_;
  std::map<std::string, std::string> basin_faucet_;
  std::map<std::string, std::string> adjacency_hints_;
  std::map<std::string, Entity> distractors_;
  std::set<std::string> discovered_;
  AgentState agent_;
  std::vector<std::string> explore_order_;
  std::size_t explore_next_ = 0;
  std::mt19937_64 rng_;
  std::int64_t tick_ = 0;
};

}  // namespace erag::sim
