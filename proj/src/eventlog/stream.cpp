#include "ttx/eventlog/stream.hpp"

#include <sstream>

#include "ttx/common/error.hpp"

namespace ttx::eventlog {

namespace fs = std::filesystem;

void Stream::Append(LogRecord record) {
  if (record.category() != category_) {
    throw Error(ErrorCode::kCategoryMismatch,
                "record of category '" + std::string(ToString(record.category())) +
                    "' appended to stream '" + std::string(ToString(category_)) + "'");
  }
  if (!records_.empty() && record.timestamp < records_.back().timestamp) {
    throw Error(ErrorCode::kOutOfOrder,
                "record at " + FormatTimestamp(record.timestamp) + " is older than last record at " +
                    FormatTimestamp(records_.back().timestamp));
  }
  if (mirror_) {
    *mirror_ << ToLine(record) << '\n';
    mirror_->flush();
    if (!*mirror_) throw Error(ErrorCode::kIo, "failed to write log record");
  }
  records_.push_back(std::move(record));
}

void Stream::MirrorTo(const fs::path& path) {
  auto out = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*out) throw Error(ErrorCode::kIo, "cannot open log file: " + path.string());
  *out << ToJsonl();
  out->flush();
  mirror_ = std::move(out);
}

std::string Stream::ToJsonl() const {
  std::string out;
  for (const auto& record : records_) {
    out += ToLine(record);
    out += '\n';
  }
  return out;
}

TeamLog::TeamLog() {
  streams_.reserve(kAllCategories.size());
  for (const auto category : kAllCategories) streams_.emplace_back(category);
}

void TeamLog::MirrorTo(const fs::path& directory) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create log directory: " + directory.string());
  for (auto& stream : streams_) stream.MirrorTo(directory / FileName(stream.category()));
}

void ExportTeamLogs(const TeamLog& log, const fs::path& directory) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create export directory: " + directory.string());
  for (const auto category : kAllCategories) {
    const fs::path path = directory / FileName(category);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    out << log.stream(category).ToJsonl();
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
}

ReadResult ParseStream(std::string_view text) {
  ReadResult result;
  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    const auto parsed = nlohmann::json::parse(line, nullptr, false);
    if (parsed.is_discarded()) {
      result.errors.push_back({line_number, "malformed JSON"});
      continue;
    }
    std::string error;
    if (auto record = FromJson(parsed, error)) {
      result.records.push_back(std::move(*record));
    } else {
      result.errors.push_back({line_number, error});
    }
  }
  return result;
}

ReadResult ReadStream(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseStream(buffer.str());
}

bool IsTeamLogDirectory(const fs::path& directory) {
  for (const auto category : kAllCategories) {
    if (fs::is_regular_file(directory / FileName(category))) return true;
  }
  return false;
}

TeamLogData ReadTeamLogs(const fs::path& directory) {
  TeamLogData data;
  data.directory = directory;
  for (const auto category : kAllCategories) {
    const std::string name = FileName(category);
    const fs::path path = directory / name;
    if (!fs::is_regular_file(path)) {
      data.missing_files.push_back(name);
      continue;
    }
    ReadResult result = ReadStream(path);
    for (const auto& error : result.errors) {
      data.errors.push_back(name + ":" + std::to_string(error.line) + ": " + error.message);
    }
    auto& records = data.streams[static_cast<std::size_t>(category)];
    for (auto& record : result.records) {
      if (record.category() != category) {
        data.errors.push_back(name + ": record of category '" +
                              std::string(ToString(record.category())) + "' in wrong file");
        continue;
      }
      if (data.team_id.empty()) data.team_id = record.team_id;
      records.push_back(std::move(record));
    }
  }
  if (data.team_id.empty()) {
    fs::path normal = directory.lexically_normal();
    if (normal.filename().empty()) normal = normal.parent_path();
    data.team_id = normal.filename().string();
  }
  return data;
}

}  // namespace ttx::eventlog
