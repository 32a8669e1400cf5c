#pragma once

#include <string>
#include <vector>

namespace erag {

/// Ordered list of attribute names tracked on every scene-graph entity.
using AttributeCatalog = std::vector<std::string>;

/// The 28 object attributes maintained by the household simulator.
inline const AttributeCatalog& household_attribute_catalog() {
  static const AttributeCatalog catalog = {
      "visible",         "isInteractable", "toggleable",  "isToggled",
      "breakable",       "isBroken",       "canFillWithLiquid",
      "isFilledWithLiquid", "fillLiquid",  "dirtyable",   "isDirty",
      "canBeUsedUp",     "isUsedUp",       "cookable",    "isCooked",
      "temperature",     "isHeatSource",   "isColdSource", "sliceable",
      "isSliced",        "openable",       "isOpen",      "openness",
      "pickupable",      "isPickedUp",     "moveable",    "salientMaterials",
      "distance"};
  return catalog;
}

}  // namespace erag
