#pragma once
// Fallback for systems without an installed nlohmann_json package.
#include "../../../vendor/json.hpp"
