// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ssv {

/// Lowercase hex SHA-256 digest.
std::string sha256Hex(std::string_view data);

std::string trim(std::string_view s);
/// Collapse runs of whitespace (newlines included) to single spaces and trim.
std::string collapseWhitespace(std::string_view s);
std::vector<std::string> splitLines(std::string_view s);

/// Percentage with one decimal, rounded half up using integer arithmetic.
std::string formatPercent(long long num, long long den);

std::string readFile(const std::string& path);
void writeFile(const std::string& path, std::string_view data);

}  // namespace ssv
