#pragma once

#ifndef LOOPCUT_VERSION
#define LOOPCUT_VERSION "0.0.0"
#endif

namespace loopcut {

inline constexpr const char* kVersion = LOOPCUT_VERSION;

}  // namespace loopcut
