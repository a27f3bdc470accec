#pragma once

namespace klemu {

#ifdef KLEMU_VERSION
inline constexpr const char* version = KLEMU_VERSION;
#else
inline constexpr const char* version = "0.0.0";
#endif

}  // namespace klemu
