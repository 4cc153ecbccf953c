#include "fixtures.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "ttx/definition/parser.hpp"

#ifndef TTX_SOURCE_DIR
#error "TTX_SOURCE_DIR must be defined"
#endif

namespace ttx::testing {

std::filesystem::path SourcePath(std::string_view relative) {
  return std::filesystem::path(TTX_SOURCE_DIR) / relative;
}

std::filesystem::path DemoDefinitionPath() { return SourcePath("scenarios/demo/definition.yaml"); }

definition::ExerciseDefinition LoadDemo() {
  auto result = definition::LoadDefinitionFile(DemoDefinitionPath());
  if (!result.ok()) {
    for (const auto& error : result.errors) std::cerr << error.ToString() << "\n";
    std::abort();
  }
  return *result.definition;
}

definition::ExerciseDefinition MustParse(std::string_view yaml) {
  auto result = definition::ParseDefinition(yaml);
  if (!result.ok()) {
    std::cerr << "fixture does not parse:\n";
    for (const auto& error : result.errors) std::cerr << "  " << error.ToString() << "\n";
    std::abort();
  }
  return *result.definition;
}

Timestamp T0() { return *ParseTimestamp("2024-01-01T09:00:00.000000Z"); }

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device device;
  path_ = std::filesystem::temp_directory_path() /
          ("ttx-test-" + std::to_string(device()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ignored;
  std::filesystem::remove_all(path_, ignored);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace ttx::testing
