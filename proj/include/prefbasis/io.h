#pragma once

#include <cstdio>
#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace prefbasis {

using Json = nlohmann::json;

// Compact single-line serialization; invalid UTF-8 is replaced, not thrown.
std::string ToLine(const Json& value);

// Reads a file as lines. A trailing newline does not start a new line.
std::vector<std::string> ReadLines(const std::filesystem::path& path);

std::string ReadFile(const std::filesystem::path& path);

// Writes through a temporary sibling and renames, so readers never observe a
// half-written artifact.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view content);

Json ReadJsonFile(const std::filesystem::path& path);

// Pretty-printed with a trailing newline.
void WriteJsonFile(const std::filesystem::path& path, const Json& value);

// One JSON document per line, written atomically.
void WriteJsonLines(const std::filesystem::path& path, const std::vector<Json>& rows);

// Append-only line log shared by concurrent writers. Each Append is flushed
// (and fsynced when `durable`) before returning.
class AppendLog {
 public:
  AppendLog(const std::filesystem::path& path, bool durable);
  ~AppendLog();

  AppendLog(const AppendLog&) = delete;
  AppendLog& operator=(const AppendLog&) = delete;

  void Append(std::string_view line);

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  bool durable_;
  std::FILE* file_ = nullptr;
  std::mutex mu_;
};

}  // namespace prefbasis
