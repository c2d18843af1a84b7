#include "annoserve/ingest.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "annoserve/text.hpp"

namespace annoserve {

namespace fs = std::filesystem;

namespace {

std::size_t line_of_byte(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

void require_utf8(std::string_view text, const std::string& source) {
  std::size_t bad = 0;
  if (!decode_utf8(text, &bad)) {
    throw IngestError(source + ":" + std::to_string(line_of_byte(text, bad)) + ": invalid UTF-8 byte sequence");
  }
}

std::string_view strip_bom(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  return text;
}

}  // namespace

std::vector<RawRecord> read_delimited(std::string_view text, char delimiter, const std::string& source) {
  text = strip_bom(text);
  require_utf8(text, source);

  struct Row {
    std::vector<std::string> cells;
    std::size_t line = 0;
  };
  std::vector<Row> rows;
  Row row;
  std::string cell;
  std::size_t line = 1;
  row.line = 1;
  bool in_quotes = false;
  bool cell_was_quoted = false;
  bool row_has_content = false;
  std::size_t quote_line = 0;

  auto end_cell = [&] {
    row.cells.push_back(std::move(cell));
    cell.clear();
    cell_was_quoted = false;
  };
  auto end_row = [&] {
    end_cell();
    if (row_has_content) rows.push_back(std::move(row));
    row = Row{};
    row_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        cell.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      if (!cell.empty() || cell_was_quoted) {
        throw IngestError(source + ":" + std::to_string(line) + ": unexpected quote inside unquoted field");
      }
      in_quotes = true;
      cell_was_quoted = true;
      row_has_content = true;
      quote_line = line;
    } else if (c == delimiter) {
      end_cell();
      row_has_content = true;
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      continue;
    } else if (c == '\n') {
      end_row();
      ++line;
      row.line = line;
    } else {
      if (cell_was_quoted) {
        throw IngestError(source + ":" + std::to_string(line) + ": characters after closing quote");
      }
      cell.push_back(c);
      row_has_content = true;
    }
  }
  if (in_quotes) throw IngestError(source + ":" + std::to_string(quote_line) + ": unterminated quoted field");
  end_row();

  std::vector<RawRecord> out;
  if (rows.empty()) return out;
  const auto& header = rows.front().cells;
  {
    std::map<std::string, int> seen;
    for (const auto& h : header) {
      if (h.empty()) throw IngestError(source + ":1: empty column name in header");
      if (seen[h]++) throw IngestError(source + ":1: duplicate column '" + h + "' in header");
    }
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& cells = rows[r].cells;
    if (cells.size() != header.size()) {
      throw IngestError(source + ":" + std::to_string(rows[r].line) + ": expected " + std::to_string(header.size()) +
                        " fields, found " + std::to_string(cells.size()));
    }
    RawRecord rec;
    rec.fields = nlohmann::json::object();
    for (std::size_t k = 0; k < header.size(); ++k) rec.fields[header[k]] = cells[k];
    rec.location = source + ":" + std::to_string(rows[r].line);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<RawRecord> read_json_lines(std::string_view text, const std::string& source) {
  text = strip_bom(text);
  require_utf8(text, source);
  std::vector<RawRecord> out;
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    std::string_view raw = text.substr(pos, end - pos);
    ++line;
    pos = end + 1;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    const bool blank = raw.find_first_not_of(" \t") == std::string_view::npos;
    if (!blank) {
      RawRecord rec;
      try {
        rec.fields = nlohmann::json::parse(raw);
      } catch (const nlohmann::json::parse_error& e) {
        throw IngestError(source + ":" + std::to_string(line) + ": undecodable record: " + e.what());
      }
      if (!rec.fields.is_object()) {
        throw IngestError(source + ":" + std::to_string(line) + ": record is not a JSON object");
      }
      rec.location = source + ":" + std::to_string(line);
      out.push_back(std::move(rec));
    }
    if (nl == std::string_view::npos) break;
  }
  return out;
}

std::vector<RawRecord> read_records(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("data file not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto ext = path.extension().string();
  const std::string source = path.filename().string();
  if (ext == ".csv") return read_delimited(text, ',', source);
  if (ext == ".tsv") return read_delimited(text, '\t', source);
  if (ext == ".jsonl") return read_json_lines(text, source);
  throw IngestError("unsupported data file extension '" + ext + "': " + path.string());
}

RecordLayout record_layout(const TaskConfig& config) {
  return {config.id_field, config.text_fields, config.text_field_is_list, config.image_fields};
}

std::vector<Instance> instances_from_records(const std::vector<RawRecord>& records, const TaskConfig& config,
                                             const fs::path& media_base) {
  const auto layout = record_layout(config);
  std::vector<Instance> out;
  out.reserve(records.size());
  std::map<std::string, std::string> first_seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    std::string err;
    auto inst = instance_from_record(rec.fields, layout, &err);
    if (!inst) throw IngestError(rec.location + ": record " + std::to_string(i) + ": " + err);
    for (const auto& doc : inst->documents) {
      if (doc.kind != DocumentKind::image_ref) continue;
      if (looks_like_url(doc.payload)) continue;
      const fs::path p = fs::path(doc.payload).is_absolute() ? fs::path(doc.payload) : media_base / doc.payload;
      if (!fs::exists(p)) {
        throw IngestError(rec.location + ": image reference '" + doc.payload + "' is neither a URL nor an existing file");
      }
    }
    const auto [it, fresh] = first_seen.emplace(inst->id, rec.location);
    if (!fresh) {
      throw IngestError("duplicate instance id '" + inst->id + "' at " + rec.location + " (first seen at " + it->second +
                        ")");
    }
    out.push_back(std::move(*inst));
  }
  return out;
}

std::vector<Instance> load_instances(const TaskConfig& config) {
  std::vector<RawRecord> all;
  for (const auto& file : config.data_files) {
    const auto path = config.resolve(file);
    auto records = read_records(path);
    all.insert(all.end(), std::make_move_iterator(records.begin()), std::make_move_iterator(records.end()));
  }
  return instances_from_records(all, config, config.base_dir);
}

std::string delimited_escape(std::string_view field, char delimiter) {
  const bool quote = field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string_view::npos;
  if (!quote) return std::string(field);
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace annoserve
