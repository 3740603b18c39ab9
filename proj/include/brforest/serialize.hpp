#pragma once

#include <string>

#include "brforest/forest.hpp"

namespace brf {

// Versioned JSON model container (config + nested tree nodes). Format is for
// the fit/predict round trip and debugging, not a stability guarantee.
void save_forest(const RandomForest& rf, const std::string& path);
RandomForest load_forest(const std::string& path);

std::string forest_to_json(const RandomForest& rf);
RandomForest forest_from_json(const std::string& text);

}  // namespace brf
