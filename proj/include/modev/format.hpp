#pragma once

#include <cstdint>
#include <string>

#include "modev/types.hpp"

namespace modev {

/// "(v0, v1, ...)" with %.10g entries.
std::string format_vector(const ConstVecRef& v);

/// printf-style %.10g.
std::string format_double(double x);

/// 16 lowercase hex digits.
std::string format_fingerprint(std::uint64_t h);

}  // namespace modev
