#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ttx/common/time.hpp"
#include "ttx/definition/model.hpp"

namespace ttx::testing {

// Absolute path of a file in the source tree.
std::filesystem::path SourcePath(std::string_view relative);

std::filesystem::path DemoDefinitionPath();
definition::ExerciseDefinition LoadDemo();

// Parses `yaml` and aborts the test binary with the diagnostics if it fails.
definition::ExerciseDefinition MustParse(std::string_view yaml);

// 2024-01-01T09:00:00.000000Z
Timestamp T0();

// Unique directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string ReadFile(const std::filesystem::path& path);

}  // namespace ttx::testing
