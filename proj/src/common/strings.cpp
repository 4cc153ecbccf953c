#include "ttx/common/strings.hpp"

#include <algorithm>
#include <cctype>

namespace ttx {

std::string ToLower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool EqualsIgnoreCase(std::string_view a, std::string_view b) {
  return a.size() == b.size() && ToLower(a) == ToLower(b);
}

bool ContainsIgnoreCase(std::string_view haystack, std::string_view needle) {
  return ToLower(haystack).find(ToLower(needle)) != std::string::npos;
}

bool MatchesAnyKeyword(std::string_view text, const std::vector<std::string>& keywords) {
  if (keywords.empty()) return true;
  const std::string lowered = ToLower(text);
  return std::any_of(keywords.begin(), keywords.end(), [&](const std::string& keyword) {
    return lowered.find(ToLower(keyword)) != std::string::npos;
  });
}

}  // namespace ttx
