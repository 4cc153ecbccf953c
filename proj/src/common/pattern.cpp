#include "ttx/common/pattern.hpp"

#include <memory>
#include <mutex>
#include <regex>
#include <unordered_map>

namespace ttx {

namespace {

std::shared_ptr<const std::regex> Compile(const std::string& pattern) {
  static std::mutex mutex;
  static std::unordered_map<std::string, std::shared_ptr<const std::regex>> cache;
  std::lock_guard lock(mutex);
  if (const auto it = cache.find(pattern); it != cache.end()) return it->second;
  std::shared_ptr<const std::regex> compiled;
  try {
    compiled = std::make_shared<const std::regex>(pattern, std::regex::ECMAScript);
  } catch (const std::regex_error&) {
  }
  cache.emplace(pattern, compiled);
  return compiled;
}

}  // namespace

std::optional<std::string> PatternError(const std::string& pattern) {
  try {
    std::regex compiled(pattern, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    return std::string(e.what());
  }
  return std::nullopt;
}

bool PatternMatches(const std::string& pattern, const std::string& value) {
  const auto compiled = Compile(pattern);
  return compiled != nullptr && std::regex_match(value, *compiled);
}

}  // namespace ttx
