#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ttx {

std::string ToLower(std::string_view text);
bool EqualsIgnoreCase(std::string_view a, std::string_view b);
bool ContainsIgnoreCase(std::string_view haystack, std::string_view needle);
// True when `keywords` is empty or any keyword occurs in `text` (case-insensitive).
bool MatchesAnyKeyword(std::string_view text, const std::vector<std::string>& keywords);

}  // namespace ttx
