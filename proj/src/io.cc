#include "prefbasis/io.h"

#include <unistd.h>

#include <fstream>
#include <sstream>

#include "fmt/format.h"
#include "prefbasis/error.h"

namespace prefbasis {

std::string ToLine(const Json& value) {
  return value.dump(-1, ' ', false, Json::error_handler_t::replace);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError(fmt::format("read failed: {}", path.string()));
  return buffer.str();
}

std::vector<std::string> ReadLines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw IoError(fmt::format("read failed: {}", path.string()));
  return lines;
}

void WriteFileAtomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write {}", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError(fmt::format("write failed: {}", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError(fmt::format("cannot rename {} -> {}: {}", tmp.string(),
                              path.string(), ec.message()));
  }
}

Json ReadJsonFile(const std::filesystem::path& path) {
  const std::string text = ReadFile(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw ValidationError(fmt::format("{}: invalid JSON: {}", path.string(), e.what()));
  }
}

void WriteJsonFile(const std::filesystem::path& path, const Json& value) {
  WriteFileAtomic(path, value.dump(2, ' ', false, Json::error_handler_t::replace) + "\n");
}

void WriteJsonLines(const std::filesystem::path& path, const std::vector<Json>& rows) {
  std::string content;
  for (const Json& row : rows) {
    content += ToLine(row);
    content += '\n';
  }
  WriteFileAtomic(path, content);
}

AppendLog::AppendLog(const std::filesystem::path& path, bool durable)
    : path_(path), durable_(durable) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  file_ = std::fopen(path.c_str(), "ab");
  if (file_ == nullptr) throw IoError(fmt::format("cannot append to {}", path.string()));
}

AppendLog::~AppendLog() {
  if (file_ != nullptr) std::fclose(file_);
}

void AppendLog::Append(std::string_view line) {
  std::lock_guard<std::mutex> lock(mu_);
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() ||
      std::fputc('\n', file_) == EOF || std::fflush(file_) != 0) {
    throw IoError(fmt::format("append failed: {}", path_.string()));
  }
  if (durable_ && ::fsync(::fileno(file_)) != 0) {
    throw IoError(fmt::format("fsync failed: {}", path_.string()));
  }
}

}  // namespace prefbasis
