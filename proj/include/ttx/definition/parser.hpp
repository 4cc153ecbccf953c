#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ttx/definition/model.hpp"

namespace ttx::definition {

struct ParseResult {
  std::optional<ExerciseDefinition> definition;  // set iff `errors` is empty
  std::vector<Diagnostic> errors;
  std::vector<Diagnostic> warnings;

  bool ok() const { return definition.has_value(); }
};

// Parses a definition document (restricted YAML: mappings, sequences and
// scalars; no anchors, aliases, duplicate keys or multiple documents), expands
// `builtin:` tool references, and validates the result. Never throws.
ParseResult ParseDefinition(std::string_view text);

// Reads and parses a file. Throws Error(kIo) when the file cannot be read so
// callers can tell I/O failures from definition errors.
ParseResult LoadDefinitionFile(const std::filesystem::path& path);

// Emits a document that ParseDefinition maps back to an equal definition.
// Builtin tools are written out in full.
std::string SerializeDefinition(const ExerciseDefinition& definition);

}  // namespace ttx::definition
