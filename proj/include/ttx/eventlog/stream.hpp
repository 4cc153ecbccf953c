#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ttx/eventlog/record.hpp"

namespace ttx::eventlog {

// Append-only, single-category stream of records with non-decreasing
// timestamps. Optionally mirrored line by line to a file, flushed per append.
class Stream {
 public:
  explicit Stream(Category category) : category_(category) {}

  Stream(Stream&&) noexcept = default;
  Stream& operator=(Stream&&) noexcept = default;

  // Throws Error(kCategoryMismatch) or Error(kOutOfOrder); the stream is
  // unchanged on failure.
  void Append(LogRecord record);

  // Writes existing records to `path` (truncating) and mirrors later appends.
  void MirrorTo(const std::filesystem::path& path);

  Category category() const { return category_; }
  const std::vector<LogRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  // JSONL rendering, one line per record, each line newline-terminated.
  std::string ToJsonl() const;

 private:
  Category category_;
  std::vector<LogRecord> records_;
  std::unique_ptr<std::ofstream> mirror_;
};

// The four streams of one team.
class TeamLog {
 public:
  TeamLog();

  void Append(LogRecord record) { stream(record.category()).Append(std::move(record)); }

  Stream& stream(Category category) { return streams_[static_cast<std::size_t>(category)]; }
  const Stream& stream(Category category) const {
    return streams_[static_cast<std::size_t>(category)];
  }

  void MirrorTo(const std::filesystem::path& directory);

 private:
  std::vector<Stream> streams_;
};

// Writes exactly the four files into `directory` (created if needed). Empty
// streams produce empty files. Throws Error(kIo) on write failure.
void ExportTeamLogs(const TeamLog& log, const std::filesystem::path& directory);

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct ReadResult {
  std::vector<LogRecord> records;
  std::vector<LineError> errors;
};

// Parses JSONL text; malformed lines are reported and skipped. Blank lines are
// ignored.
ReadResult ParseStream(std::string_view text);

// Throws Error(kIo) if the file cannot be opened.
ReadResult ReadStream(const std::filesystem::path& file);

// The four streams of one exported team directory.
struct TeamLogData {
  std::string team_id;  // from the records, else the directory name
  std::filesystem::path directory;
  std::array<std::vector<LogRecord>, 4> streams;
  std::vector<std::string> missing_files;
  std::vector<std::string> errors;  // "<file>:<line>: <message>"

  const std::vector<LogRecord>& stream(Category category) const {
    return streams[static_cast<std::size_t>(category)];
  }
};

TeamLogData ReadTeamLogs(const std::filesystem::path& directory);

// True if `directory` holds at least one of the four stream files.
bool IsTeamLogDirectory(const std::filesystem::path& directory);

}  // namespace ttx::eventlog
