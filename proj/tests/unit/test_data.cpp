#include <gtest/gtest.h>

#include "erag/errors.hpp"
#include "erag/abstraction.hpp"
#include "erag/agent.hpp"
#include "erag/embedding.hpp"
#include "erag/prompts.hpp"
#include "erag/tasks.hpp"

using namespace erag;

namespace {

const std::vector<std::string> kEasy = {
    "Pick up the pot that is on the counter top and place it on the shelf",
    "Pick up the credit card that is on the counter top and place it in the drawer",
    "Pick up the vase that is on the shelf and place it in the cabinet",
    "Pick up the lettuce that is on the counter top and place it in the garbage can",
    "Pick up the apple that is on the counter top and place it in the pot that is on the counter top",
    "Pick up the pepper shaker that is on the counter top and place it on the shelf",
    "Pick up the potato that is on the counter top and place it in the garbage can",
    "Pick up the cup that is in the sink and place it in the microwave that is on the counter top",
    "Pick up the spatula that is on the counter top and place it in the bowl that is on the counter top",
    "Put the pepper shaker found on the counter top in a drawer",
    "Pick up the fork that is on the counter top and place it in the cup that is on the counter top",
    "Pick up the potato that is on the counter top and place it in the fridge",
    "Put a tomato on a plate",
    "Pick up the cell phone that is on the shelf and place it on the counter top",
    "Put the credit card on the counter top in a drawer",
    "Take the bread from the dining table and place it on a counter",
    "Pick up the mug that is in the coffee machine and place it in the sink basin",
    "pick up the dish sponge that is on the counter top and place it in the sink basin",
    "Pick up the lettuce that is on the dining table and place it on the counter top",
    "Pick up the kettle that is in the cabinet and place it in the sink basin"};

const std::vector<std::string> kHard = {
    "Cook an egg",
    "Water the plant",
    "Place a fork in a pot and a spoon in the sink",
    "Boil a potato and fry an egg. Leave the cooked food inside what they were cooked in",
    "Cook a potato without using the stove. Leave the potato inside what it was cooked in",
    "Chill the tomato",
    "Water the plant and remove all objects from the fridge",
    "Put the bowl away in a cabinet and put the mug in the sink",
    "The apple in the fridge is rotten. Dispose of it",
    "Store the bread and potato. Do not store any of them on a shelf or in a fridge",
    "Fill the cup, mug, and pot with water",
    "Place the lettuce, tomato, and potato in the sink",
    "I need to run errands tomorrow. To do this, I will need something to pay with and something to "
    "use to navigate. Place these two items inside a drawer in preparation for my trip",
    "Remove all items from the sink",
    "Place all kitchen utensils that are not knives away in drawers",
    "Boil some water for tea",
    "Find all eating utensils besides knives and place them on the dining room table",
    "Clear off the dining room table",
    "Put the lettuce away where it will stay fresh",
    "Put a fruit in the fridge and close the fridge door. Next, place a tomato in a cabinet"};

std::vector<Task> tasks() { return load_tasks(default_data_dir() + "/data/tasks/tasks.json"); }
std::map<std::string, sim::Scene> scenes() { return load_scenes(default_data_dir() + "/data/scenes"); }

}  // namespace

TEST(ShippedData, TaskListMatchesBenchmark) {
  const auto all = tasks();
  ASSERT_EQ(all.size(), 40u);
  std::vector<std::string> easy, hard;
  for (const auto& t : all) (t.difficulty == "easy" ? easy : hard).push_back(t.text);
  EXPECT_EQ(easy, kEasy);
  EXPECT_EQ(hard, kHard);
  const auto sc = scenes();
  for (const auto& t : all) {
    EXPECT_TRUE(sc.count(t.scene)) << t.id;
    EXPECT_FALSE(t.solution.steps.empty()) << t.id;
    EXPECT_LE(t.solution.steps.size(), ReactAgent::kMaxSteps) << t.id;
  }
  EXPECT_THROW(find_task(all, "easy_99"), NotFoundError);
}

TEST(ShippedData, FiveScenesWithDisjointDistractorVocabulary) {
  const auto sc = scenes();
  ASSERT_EQ(sc.size(), 5u);
  HashingEmbedder e;
  std::set<std::string> terms;
  for (const auto& t : tasks()) {
    for (const auto& term : parse_comma_list(t.solution.entities)) terms.insert(term);
  }
  for (const auto& [id, scene] : sc) {
    EXPECT_GE(scene.rooms.size(), 2u) << id;
    EXPECT_FALSE(scene.distractor_vocabulary.empty()) << id;
    std::set<std::string> labels;
    for (const auto& o : scene.objects) {
      labels.insert(o.label);
      terms.insert(o.label);
    }
    for (const auto& word : scene.distractor_vocabulary) {
      EXPECT_FALSE(labels.count(word)) << word;
      for (const auto& term : terms) {
        EXPECT_LT(dot(e.embed(word), e.embed(term)), RetrievalParams::kDefaultThreshold)
            << word << " vs " << term;
      }
    }
    EXPECT_EQ(sim::World(scene, 0).invariant_violation(), "") << id;
  }
}

TEST(ShippedData, CatalogAndActions) {
  const std::vector<std::string> attrs = {
      "visible", "isInteractable", "toggleable", "isToggled", "breakable", "isBroken",
      "canFillWithLiquid", "isFilledWithLiquid", "fillLiquid", "dirtyable", "isDirty",
      "canBeUsedUp", "isUsedUp", "cookable", "isCooked", "temperature", "isHeatSource",
      "isColdSource", "sliceable", "isSliced", "openable", "isOpen", "openness", "pickupable",
      "isPickedUp", "moveable", "salientMaterials", "distance"};
  EXPECT_EQ(household_attribute_catalog(), attrs);
  const std::vector<std::string> actions = {
      "randomlyexplore", "getdiscoveredobjects", "getvisibleobjects", "moveto", "inspect",
      "pickup", "placeon", "open", "close", "toggleon", "toggleoff", "search",
      "fillheldobjectwithwater", "pourwaterinto", "adjustpositioning"};
  EXPECT_EQ(sim::action_names(), actions);
  std::vector<std::string> registered;
  const ActionRegistry reg = ActionRegistry::household(AgentVariant::kReact);
  for (const auto& [name, desc] : reg.actions()) {
    registered.push_back(name);
  }
  EXPECT_EQ(registered, actions);
}

TEST(ShippedData, SolutionRepliesRoundTrip) {
  for (const auto& t : tasks()) {
    for (const auto& step : t.solution.steps) {
      const auto p = parse_react(format_react_reply(step));
      EXPECT_EQ(p.action, step.action) << t.id;
      EXPECT_EQ(p.action_input, step.input) << t.id;
      EXPECT_EQ(p.thought, step.thought) << t.id;
    }
  }
}
