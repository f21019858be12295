#pragma once

#include <string>

namespace transboost {

// Shortest-form is not enough for round-trips across parsers; 17 significant
// digits always is.
std::string format_real(double v);

}  // namespace transboost
