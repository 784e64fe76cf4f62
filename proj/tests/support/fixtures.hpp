// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "ssv/util.hpp"

#ifndef SSV_SOURCE_DIR
#error "SSV_SOURCE_DIR must point at the repository root"
#endif

namespace ssv::testing {

inline std::string fixturePath(const std::string& rel) { return std::string(SSV_SOURCE_DIR) + "/fixtures/" + rel; }
inline std::string fixture(const std::string& rel) { return readFile(fixturePath(rel)); }

}  // namespace ssv::testing
