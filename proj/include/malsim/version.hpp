#pragma once

namespace malsim {

inline constexpr const char* kToolVersion = "0.1.0";

} // namespace malsim
