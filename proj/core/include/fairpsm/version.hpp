#pragma once

namespace fairpsm {

inline constexpr const char* kVersion = "0.1.0";

}
