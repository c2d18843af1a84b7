#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "annoserve/config.hpp"
#include "annoserve/instance.hpp"

namespace annoserve {

class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One decoded record plus where it came from, for error messages.
struct RawRecord {
  nlohmann::json fields;  // object
  std::string location;   // "file:line"
};

/// Delimited text with a header row. Quoted fields may contain delimiters,
/// doubled quotes and newlines. Throws IngestError with a line number on
/// malformed input or invalid UTF-8.
std::vector<RawRecord> read_delimited(std::string_view text, char delimiter, const std::string& source);

/// One JSON object per non-blank line.
std::vector<RawRecord> read_json_lines(std::string_view text, const std::string& source);

/// Reads a data file, picking the format from its extension (.csv, .tsv,
/// .jsonl).
std::vector<RawRecord> read_records(const std::filesystem::path& path);

/// Loads every configured data file in order and converts records to
/// instances. Throws IngestError on a missing id, duplicate id (naming both
/// locations), undecodable record, or an image reference that is neither a
/// URL nor an existing file.
std::vector<Instance> load_instances(const TaskConfig& config);

/// Converts already-read records; used by load_instances and tests.
std::vector<Instance> instances_from_records(const std::vector<RawRecord>& records, const TaskConfig& config,
                                             const std::filesystem::path& media_base);

RecordLayout record_layout(const TaskConfig& config);

/// Minimal RFC 4180 field quoting for writers.
std::string delimited_escape(std::string_view field, char delimiter);

}  // namespace annoserve
