#include "annoserve/export.hpp"

#include <set>
#include <stdexcept>

#include "annoserve/ingest.hpp"
#include "annoserve/persistence.hpp"

namespace annoserve {

using nlohmann::json;

std::optional<ExportFormat> parse_export_format(std::string_view s) {
  if (s == "jsonl") return ExportFormat::jsonl;
  if (s == "csv") return ExportFormat::csv;
  return std::nullopt;
}

namespace {

json highlights_json(const std::vector<HighlightSpan>& spans) {
  json out = json::array();
  for (const auto& h : spans) {
    out.push_back({{"doc", h.document_index},
                   {"start", h.start},
                   {"end", h.end},
                   {"source", std::string(to_string(h.source))},
                   {"group", h.group}});
  }
  return out;
}

std::vector<HighlightSpan> highlights_from(const json& arr) {
  std::vector<HighlightSpan> out;
  for (const auto& h : arr) {
    HighlightSpan s;
    s.document_index = h.at("doc").get<std::size_t>();
    s.start = h.at("start").get<std::size_t>();
    s.end = h.at("end").get<std::size_t>();
    s.source = h.at("source").get<std::string>() == "decoy" ? HighlightSource::decoy : HighlightSource::keyword;
    s.group = h.value("group", "");
    out.push_back(std::move(s));
  }
  return out;
}

bool raw_string_kind(SchemeKind k) {
  return k == SchemeKind::radio || k == SchemeKind::dropdown || k == SchemeKind::free_text;
}

std::string write_lines(const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace

json to_json(const AnnotationRecord& r) {
  return {{"user", r.user},
          {"instance_id", r.instance_id},
          {"position", r.position},
          {"meta", r.meta},
          {"labels", r.labels},
          {"elapsed_ms", r.elapsed_ms},
          {"revision", r.revision},
          {"received_at", r.received_at},
          {"highlights", highlights_json(r.highlights)},
          {"quality_state", r.quality_state}};
}

AnnotationRecord annotation_from_json(const json& j) {
  AnnotationRecord r;
  r.user = j.at("user").get<std::string>();
  r.instance_id = j.at("instance_id").get<std::string>();
  r.position = j.at("position").get<std::size_t>();
  r.meta = j.at("meta").get<std::map<std::string, std::string>>();
  r.labels = j.at("labels");
  r.elapsed_ms = j.at("elapsed_ms").get<std::int64_t>();
  r.revision = j.at("revision").get<std::size_t>();
  r.received_at = j.at("received_at").get<std::int64_t>();
  r.highlights = highlights_from(j.at("highlights"));
  r.quality_state = j.at("quality_state").get<std::string>();
  return r;
}

std::string write_jsonl(const std::vector<AnnotationRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<AnnotationRecord> read_jsonl(std::string_view text) {
  std::vector<AnnotationRecord> out;
  for (const auto& raw : read_json_lines(text, "annotations.jsonl")) out.push_back(annotation_from_json(raw.fields));
  return out;
}

namespace {

const std::vector<std::string> kFixedColumns = {"user",       "instance_id", "position",     "elapsed_ms",
                                                "revision",   "received_at", "quality_state"};

}  // namespace

std::string write_csv(const std::vector<AnnotationRecord>& records, const std::vector<AnnotationScheme>& schemes) {
  std::set<std::string> meta_keys;
  for (const auto& r : records) {
    for (const auto& [k, v] : r.meta) meta_keys.insert(k);
  }
  std::vector<std::string> header = kFixedColumns;
  for (const auto& k : meta_keys) header.push_back("meta." + k);
  for (const auto& s : schemes) header.push_back(s.name);
  header.push_back("highlights");

  std::string out;
  auto emit_row = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out.push_back(',');
      out += delimited_escape(cells[i], ',');
    }
    out += "\r\n";
  };
  emit_row(header);
  for (const auto& r : records) {
    std::vector<std::string> row = {r.user,
                                    r.instance_id,
                                    std::to_string(r.position),
                                    std::to_string(r.elapsed_ms),
                                    std::to_string(r.revision),
                                    std::to_string(r.received_at),
                                    r.quality_state};
    for (const auto& k : meta_keys) {
      const auto it = r.meta.find(k);
      row.push_back(it == r.meta.end() ? "" : it->second);
    }
    for (const auto& s : schemes) {
      const auto it = r.labels.find(s.name);
      if (it == r.labels.end()) {
        row.emplace_back();
      } else if (raw_string_kind(s.kind) && it->is_string()) {
        row.push_back(it->get<std::string>());
      } else {
        row.push_back(it->dump());
      }
    }
    row.push_back(highlights_json(r.highlights).dump());
    emit_row(row);
  }
  return out;
}

std::vector<AnnotationRecord> read_csv(std::string_view text, const std::vector<AnnotationScheme>& schemes) {
  std::vector<AnnotationRecord> out;
  for (const auto& raw : read_delimited(text, ',', "annotations.csv")) {
    const auto& f = raw.fields;
    auto cell = [&](const std::string& name) -> std::string {
      const auto it = f.find(name);
      return it == f.end() ? std::string() : it->get<std::string>();
    };
    AnnotationRecord r;
    r.user = cell("user");
    r.instance_id = cell("instance_id");
    r.position = std::stoull(cell("position"));
    r.elapsed_ms = std::stoll(cell("elapsed_ms"));
    r.revision = std::stoull(cell("revision"));
    r.received_at = std::stoll(cell("received_at"));
    r.quality_state = cell("quality_state");
    for (auto it = f.begin(); it != f.end(); ++it) {
      if (it.key().rfind("meta.", 0) == 0 && !it->get<std::string>().empty()) {
        r.meta[it.key().substr(5)] = it->get<std::string>();
      }
    }
    for (const auto& s : schemes) {
      const auto v = cell(s.name);
      if (v.empty()) continue;
      r.labels[s.name] = raw_string_kind(s.kind) ? json(v) : json::parse(v);
    }
    r.highlights = highlights_from(json::parse(cell("highlights")));
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

json survey_json(const SurveyRecord& s) {
  return {{"user", s.user}, {"phase", s.phase}, {"page", s.page}, {"title", s.title}, {"answers", s.answers}};
}

json gold_json(const GoldRecord& g) {
  return {{"user", g.user},         {"kind", g.kind},       {"position", g.position},
          {"gold_id", g.gold_id},   {"labels", g.labels},   {"matched", g.matched},
          {"elapsed_ms", g.elapsed_ms}, {"received_at", g.received_at}};
}

}  // namespace

ExportResult export_annotations(const AnnotationStore& store, const TaskConfig& config, ExportFormat format,
                                const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create export directory " + dir.string() + ": " + ec.message());
  ExportResult result;
  const auto main_path = dir / (format == ExportFormat::csv ? "annotations.csv" : "annotations.jsonl");
  write_file_atomic(main_path, format == ExportFormat::csv ? write_csv(store.records, config.schemes)
                                                           : write_jsonl(store.records));
  std::vector<json> surveys;
  for (const auto& s : store.surveys) surveys.push_back(survey_json(s));
  std::vector<json> gold;
  for (const auto& g : store.gold) gold.push_back(gold_json(g));
  write_file_atomic(dir / "surveys.jsonl", write_lines(surveys));
  write_file_atomic(dir / "gold_responses.jsonl", write_lines(gold));
  result.files = {main_path, dir / "surveys.jsonl", dir / "gold_responses.jsonl"};
  result.records = store.records.size();
  return result;
}

AnnotationStore read_export(const std::filesystem::path& dir, const TaskConfig& config, ExportFormat format) {
  AnnotationStore store;
  if (format == ExportFormat::csv) {
    store.records = read_csv(read_file(dir / "annotations.csv").value_or(""), config.schemes);
  } else {
    store.records = read_jsonl(read_file(dir / "annotations.jsonl").value_or(""));
  }
  for (const auto& raw : read_json_lines(read_file(dir / "surveys.jsonl").value_or(""), "surveys.jsonl")) {
    const auto& j = raw.fields;
    store.surveys.push_back({j.at("user"), j.at("phase"), j.at("page"), j.at("title"), j.at("answers")});
  }
  for (const auto& raw : read_json_lines(read_file(dir / "gold_responses.jsonl").value_or(""), "gold_responses.jsonl")) {
    const auto& j = raw.fields;
    store.gold.push_back({j.at("user"), j.at("kind"), j.at("position"), j.at("gold_id"), j.at("labels"),
                          j.at("matched"), j.at("elapsed_ms"), j.at("received_at")});
  }
  return store;
}

}  // namespace annoserve
