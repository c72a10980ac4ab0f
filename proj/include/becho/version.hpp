#pragma once

namespace becho {

inline constexpr const char* becho_version = "0.1.0";

}  // namespace becho
