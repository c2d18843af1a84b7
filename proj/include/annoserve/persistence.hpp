#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace annoserve {

/// Append-only JSON-lines file. Every append is written with a single
/// write(2) and fsync'd before returning, so an acknowledged record survives
/// a crash. A torn final line (crash mid-write) is ignored on read.
class DurableLog {
 public:
  explicit DurableLog(std::filesystem::path path);
  ~DurableLog();
  DurableLog(const DurableLog&) = delete;
  DurableLog& operator=(const DurableLog&) = delete;

  void append(const nlohmann::json& record);
  const std::filesystem::path& path() const { return path_; }

  /// Complete records in file order.
  static std::vector<nlohmann::json> read(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

/// Atomically replaces `path` (temp file, fsync, rename, fsync directory).
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::optional<std::string> read_file(const std::filesystem::path& path);

/// Filesystem-safe, reversible encoding of an arbitrary user id.
std::string hex_escape(std::string_view id);
std::optional<std::string> hex_unescape(std::string_view name);

}  // namespace annoserve
