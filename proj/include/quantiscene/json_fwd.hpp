#pragma once

#include <json.hpp>

namespace quantiscene {

/// All serialized formats use insertion-ordered objects so key order is pinned.
using Json = nlohmann::ordered_json;

}  // namespace quantiscene
