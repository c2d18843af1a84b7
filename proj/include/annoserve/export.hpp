#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "annoserve/config.hpp"
#include "annoserve/highlight.hpp"

namespace annoserve {

/// One main-task annotation: one per (annotator, instance).
struct AnnotationRecord {
  std::string user;
  std::string instance_id;
  std::size_t position = 0;  // queue position, attention items included
  std::map<std::string, std::string> meta;
  nlohmann::json labels = nlohmann::json::object();  // scheme -> wire value
  std::int64_t elapsed_ms = 0;                        // summed over visits
  std::size_t revision = 0;
  std::int64_t received_at = 0;  // ms since epoch, latest submission
  std::vector<HighlightSpan> highlights;
  std::string quality_state;
  bool operator==(const AnnotationRecord&) const = default;
};

struct SurveyRecord {
  std::string user;
  std::string phase;  // "pre" or "post"
  std::size_t page = 0;
  std::string title;
  nlohmann::json answers = nlohmann::json::object();
  bool operator==(const SurveyRecord&) const = default;
};

/// Gold-item responses (prestudy and attention), logged apart from the main
/// records.
struct GoldRecord {
  std::string user;
  std::string kind;  // "prestudy" or "attention"
  std::size_t position = 0;
  std::string gold_id;
  nlohmann::json labels = nlohmann::json::object();
  bool matched = false;
  std::int64_t elapsed_ms = 0;
  std::int64_t received_at = 0;
  bool operator==(const GoldRecord&) const = default;
};

/// Everything exported, ordered by (user, position).
struct AnnotationStore {
  std::vector<AnnotationRecord> records;
  std::vector<SurveyRecord> surveys;
  std::vector<GoldRecord> gold;
  bool operator==(const AnnotationStore&) const = default;
};

enum class ExportFormat { jsonl, csv };
std::optional<ExportFormat> parse_export_format(std::string_view s);

nlohmann::json to_json(const AnnotationRecord& r);
AnnotationRecord annotation_from_json(const nlohmann::json& j);

/// Main records as JSON lines.
std::string write_jsonl(const std::vector<AnnotationRecord>& records);
std::vector<AnnotationRecord> read_jsonl(std::string_view text);

/// Main records as CSV. Columns: user, instance_id, position, elapsed_ms,
/// revision, received_at, quality_state, one `meta.<key>` per meta key, one
/// column per scheme, then highlights as JSON. Radio, dropdown and free-text
/// cells hold the raw string; other scheme cells hold the JSON value. Empty
/// cells mean "absent".
std::string write_csv(const std::vector<AnnotationRecord>& records, const std::vector<AnnotationScheme>& schemes);
std::vector<AnnotationRecord> read_csv(std::string_view text, const std::vector<AnnotationScheme>& schemes);

struct ExportResult {
  std::vector<std::filesystem::path> files;
  std::size_t records = 0;
};

/// Writes annotations.<ext>, surveys.jsonl and gold_responses.jsonl into
/// `dir`.
ExportResult export_annotations(const AnnotationStore& store, const TaskConfig& config, ExportFormat format,
                                const std::filesystem::path& dir);

/// Reads back a directory written by export_annotations.
AnnotationStore read_export(const std::filesystem::path& dir, const TaskConfig& config, ExportFormat format);

}  // namespace annoserve
