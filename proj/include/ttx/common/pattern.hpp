#pragma once

#include <optional>
#include <string>

namespace ttx {

// Validation patterns are ECMAScript regular expressions matched against the
// entire value. Compiled patterns are cached process-wide.

// Returns the compiler's error message, or nullopt if the pattern is valid.
std::optional<std::string> PatternError(const std::string& pattern);

// Whole-value match. An invalid pattern never matches.
bool PatternMatches(const std::string& pattern, const std::string& value);

}  // namespace ttx
