#pragma once

namespace spikeloc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace spikeloc
