#pragma once

namespace effham {

inline constexpr const char* kVersion = "0.1.0";

}
