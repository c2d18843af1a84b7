#include "annoserve/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "annoserve/survey.hpp"
#include "annoserve/text.hpp"

namespace annoserve {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// enum names

namespace {

template <typename E>
struct EnumName {
  E value;
  std::string_view name;
};

constexpr EnumName<LoginMode> kLoginModes[] = {
    {LoginMode::email_signup, "email_signup"}, {LoginMode::url_argument, "url_argument"}, {LoginMode::both, "both"}};
constexpr EnumName<Ordering> kOrderings[] = {
    {Ordering::original, "original"}, {Ordering::random, "random"}, {Ordering::active_learning, "active_learning"}};
constexpr EnumName<ConfidenceMeasure> kConfidence[] = {{ConfidenceMeasure::least_confidence, "least_confidence"},
                                                       {ConfidenceMeasure::margin, "margin"},
                                                       {ConfidenceMeasure::entropy, "entropy"}};
constexpr EnumName<OnFail> kOnFail[] = {{OnFail::flag, "flag"}, {OnFail::block, "block"}};
constexpr EnumName<SurveyTemplate> kSurveyTemplates[] = {{SurveyTemplate::consent, "consent"},
                                                         {SurveyTemplate::demographics, "demographics"}};

template <typename E, std::size_t N>
std::string_view name_of(const EnumName<E> (&table)[N], E v) {
  for (const auto& e : table) {
    if (e.value == v) return e.name;
  }
  return "unknown";
}

template <typename E, std::size_t N>
std::optional<E> parse_enum(const EnumName<E> (&table)[N], std::string_view s) {
  for (const auto& e : table) {
    if (e.name == s) return e.value;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string choices(const EnumName<E> (&table)[N]) {
  std::string out;
  for (const auto& e : table) {
    if (!out.empty()) out += ", ";
    out += e.name;
  }
  return out;
}

}  // namespace

std::string_view to_string(LoginMode v) { return name_of(kLoginModes, v); }
std::string_view to_string(Ordering v) { return name_of(kOrderings, v); }
std::string_view to_string(ConfidenceMeasure v) { return name_of(kConfidence, v); }
std::string_view to_string(OnFail v) { return name_of(kOnFail, v); }
std::string_view to_string(SurveyTemplate v) { return name_of(kSurveyTemplates, v); }

// ---------------------------------------------------------------------------
// TaskConfig helpers

std::size_t HighlightConfig::pattern_count() const {
  std::size_t n = 0;
  for (const auto& g : keyword_groups) n += g.patterns.size();
  return n;
}

fs::path TaskConfig::resolve(const std::string& relative) const {
  const fs::path p(relative);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

const AnnotationScheme* TaskConfig::find_scheme(std::string_view name) const {
  for (const auto& s : schemes) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::size_t TaskConfig::label_count() const {
  std::size_t n = 0;
  for (const auto& s : schemes) n += s.options.size();
  return n;
}

bool TaskConfig::operator==(const TaskConfig& o) const {
  return task_name == o.task_name && data_files == o.data_files && id_field == o.id_field &&
         text_fields == o.text_fields && text_field_is_list == o.text_field_is_list &&
         image_fields == o.image_fields && schemes == o.schemes && instructions == o.instructions &&
         template_override == o.template_override && highlight == o.highlight &&
         active_learning == o.active_learning && quality_control == o.quality_control &&
         assignment == o.assignment && server == o.server && login_mode == o.login_mode;
}

std::string format_issue(const ConfigIssue& issue) {
  std::string out;
  if (issue.line > 0) out += "line " + std::to_string(issue.line) + ": ";
  if (!issue.field.empty()) out += issue.field + ": ";
  out += issue.message;
  return out;
}

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues) {
  std::string out = "invalid task configuration";
  for (const auto& i : issues) out += "\n  " + format_issue(i);
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

bool is_valid_keyword_pattern(std::string_view pattern) {
  if (!pattern.empty() && pattern.back() == '*') pattern.remove_suffix(1);
  if (pattern.empty()) return false;
  const auto decoded = decode_utf8(pattern);
  if (!decoded) return false;
  return std::all_of(decoded->code_points.begin(), decoded->code_points.end(), is_word_char);
}

// ---------------------------------------------------------------------------
// YAML reading

namespace {

/// Walks the YAML tree, records issues with line numbers, and remembers the
/// line of every field path so later semantic checks can point at it.
class Reader {
 public:
  std::vector<ConfigIssue> issues;
  std::map<std::string, int> lines;

  static int line_of(const YAML::Node& n) {
    const auto mark = n.Mark();
    return mark.line >= 0 ? mark.line + 1 : 0;
  }

  void note(const YAML::Node& n, const std::string& path) {
    if (const int line = line_of(n); line > 0) lines.emplace(path, line);
  }

  void fail(const YAML::Node& n, const std::string& path, std::string message) {
    issues.push_back({path, std::move(message), line_of(n)});
  }

  bool expect_map(const YAML::Node& n, const std::string& path) {
    note(n, path);
    if (!n.IsMap()) {
      fail(n, path, "expected a mapping");
      return false;
    }
    return true;
  }

  bool expect_seq(const YAML::Node& n, const std::string& path) {
    note(n, path);
    if (!n.IsSequence()) {
      fail(n, path, "expected a list");
      return false;
    }
    return true;
  }

  void check_keys(const YAML::Node& map, const std::string& path, std::initializer_list<std::string_view> allowed) {
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(kv.first, join(path, key), "unknown key '" + key + "'");
      }
    }
  }

  static std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
  }

  std::optional<std::string> str(const YAML::Node& n, const std::string& path) {
    note(n, path);
    if (!n.IsScalar()) {
      fail(n, path, "expected a string");
      return std::nullopt;
    }
    return n.Scalar();
  }

  template <typename T>
  std::optional<T> number(const YAML::Node& n, const std::string& path, const char* what) {
    note(n, path);
    if (!n.IsScalar()) {
      fail(n, path, std::string("expected ") + what);
      return std::nullopt;
    }
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, path, std::string("expected ") + what + ", got '" + n.Scalar() + "'");
      return std::nullopt;
    }
  }

  std::optional<int> integer(const YAML::Node& n, const std::string& path) { return number<int>(n, path, "an integer"); }
  std::optional<double> real(const YAML::Node& n, const std::string& path) { return number<double>(n, path, "a number"); }
  std::optional<std::uint64_t> u64(const YAML::Node& n, const std::string& path) {
    return number<std::uint64_t>(n, path, "a non-negative integer");
  }

  std::optional<bool> boolean(const YAML::Node& n, const std::string& path) {
    return number<bool>(n, path, "true or false");
  }

  std::vector<std::string> string_list(const YAML::Node& n, const std::string& path) {
    std::vector<std::string> out;
    if (!expect_seq(n, path)) return out;
    for (std::size_t i = 0; i < n.size(); ++i) {
      if (auto s = str(n[i], path + "[" + std::to_string(i) + "]")) out.push_back(*s);
    }
    return out;
  }

  template <typename E, std::size_t N>
  std::optional<E> enumeration(const EnumName<E> (&table)[N], const YAML::Node& n, const std::string& path) {
    const auto s = str(n, path);
    if (!s) return std::nullopt;
    if (auto v = parse_enum(table, *s)) return v;
    fail(n, path, "unknown value '" + *s + "' (expected one of: " + choices(table) + ")");
    return std::nullopt;
  }
};

nlohmann::json yaml_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      auto arr = nlohmann::json::array();
      for (const auto& item : n) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      auto obj = nlohmann::json::object();
      for (const auto& kv : n) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar: {
      const std::string& s = n.Scalar();
      if (n.Tag() == "!") return s;  // quoted
      if (s == "true" || s == "True") return true;
      if (s == "false" || s == "False") return false;
      if (s == "~" || s == "null") return nullptr;
      std::int64_t i = 0;
      if (auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), i); ec == std::errc() && p == s.data() + s.size()) {
        return i;
      }
      double d = 0;
      if (auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d); ec == std::errc() && p == s.data() + s.size() &&
                                                                           !s.empty()) {
        return d;
      }
      return s;
    }
  }
  return nullptr;
}

Option read_option(Reader& r, const YAML::Node& n, const std::string& path) {
  Option opt;
  r.note(n, path);
  if (n.IsScalar()) {
    opt.value = n.Scalar();
    opt.display = opt.value;
    return opt;
  }
  if (!r.expect_map(n, path)) return opt;
  r.check_keys(n, path, {"value", "display", "media", "key", "tooltip"});
  if (n["value"]) {
    if (auto v = r.str(n["value"], path + ".value")) opt.value = *v;
  } else {
    r.fail(n, path + ".value", "option value is required");
  }
  opt.display = n["display"] ? r.str(n["display"], path + ".display").value_or(opt.value) : opt.value;
  if (n["media"]) opt.display_is_media = r.boolean(n["media"], path + ".media").value_or(false);
  if (n["key"]) opt.key = r.str(n["key"], path + ".key");
  if (n["tooltip"]) opt.tooltip = r.str(n["tooltip"], path + ".tooltip");
  return opt;
}

AnnotationScheme read_scheme(Reader& r, const YAML::Node& n, const std::string& path) {
  AnnotationScheme s;
  if (!r.expect_map(n, path)) return s;
  r.check_keys(n, path,
               {"name", "kind", "description", "options", "likert_size", "min_label", "max_label", "required"});
  if (n["name"]) {
    s.name = r.str(n["name"], path + ".name").value_or("");
  } else {
    r.fail(n, path + ".name", "scheme name is required");
  }
  if (n["kind"]) {
    if (const auto k = r.str(n["kind"], path + ".kind")) {
      if (auto kind = parse_scheme_kind(*k)) {
        s.kind = *kind;
      } else {
        r.fail(n["kind"], path + ".kind",
               "unknown scheme kind '" + *k +
                   "' (expected one of: multiselect, radio, best_worst, likert, free_text, span, number, dropdown)");
      }
    }
  } else {
    r.fail(n, path + ".kind", "scheme kind is required");
  }
  if (n["description"]) s.description = r.str(n["description"], path + ".description").value_or("");
  if (n["options"] && r.expect_seq(n["options"], path + ".options")) {
    for (std::size_t i = 0; i < n["options"].size(); ++i) {
      s.options.push_back(read_option(r, n["options"][i], path + ".options[" + std::to_string(i) + "]"));
    }
  }
  if (n["likert_size"]) s.likert_size = r.integer(n["likert_size"], path + ".likert_size").value_or(0);
  if (n["min_label"]) s.min_label = r.str(n["min_label"], path + ".min_label").value_or("");
  if (n["max_label"]) s.max_label = r.str(n["max_label"], path + ".max_label").value_or("");
  if (n["required"]) s.required = r.boolean(n["required"], path + ".required").value_or(true);
  return s;
}

GoldItem read_gold(Reader& r, const YAML::Node& n, const std::string& path) {
  GoldItem g;
  if (!r.expect_map(n, path)) return g;
  r.check_keys(n, path, {"id", "fields", "answers"});
  if (n["id"]) {
    g.id = r.str(n["id"], path + ".id").value_or("");
  } else {
    r.fail(n, path + ".id", "gold item id is required");
  }
  if (n["fields"] && r.expect_map(n["fields"], path + ".fields")) g.fields = yaml_to_json(n["fields"]);
  if (n["answers"] && r.expect_map(n["answers"], path + ".answers")) g.answers = yaml_to_json(n["answers"]);
  if (!n["answers"]) r.fail(n, path + ".answers", "gold answers are required");
  return g;
}

std::vector<GoldItem> read_gold_list(Reader& r, const YAML::Node& n, const std::string& path) {
  std::vector<GoldItem> out;
  if (!r.expect_seq(n, path)) return out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(read_gold(r, n[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

SurveyPage read_survey(Reader& r, const YAML::Node& n, const std::string& path) {
  SurveyPage page;
  if (!r.expect_map(n, path)) return page;
  r.check_keys(n, path, {"title", "template", "questions"});
  if (n["title"]) page.title = r.str(n["title"], path + ".title").value_or("");
  if (n["template"]) page.template_id = r.enumeration(kSurveyTemplates, n["template"], path + ".template");
  if (n["questions"] && r.expect_seq(n["questions"], path + ".questions")) {
    for (std::size_t i = 0; i < n["questions"].size(); ++i) {
      page.questions.push_back(read_scheme(r, n["questions"][i], path + ".questions[" + std::to_string(i) + "]"));
    }
  }
  return page;
}

std::vector<SurveyPage> read_survey_list(Reader& r, const YAML::Node& n, const std::string& path) {
  std::vector<SurveyPage> out;
  if (!r.expect_seq(n, path)) return out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(read_survey(r, n[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

void read_top_level(Reader& r, const YAML::Node& root, TaskConfig& c) {
  r.check_keys(root, "",
               {"task_name", "data_files", "id_field", "text_field", "image_fields", "schemes", "instructions",
                "template_override", "highlight", "active_learning", "quality_control", "assignment", "server",
                "login_mode"});

  auto require = [&](const char* key) -> YAML::Node {
    const YAML::Node n = root[key];
    if (!n) r.fail(root, key, "missing required key");
    return n;
  };

  if (auto n = require("task_name")) c.task_name = r.str(n, "task_name").value_or("");
  if (auto n = require("data_files")) {
    if (n.IsScalar()) {
      r.note(n, "data_files");
      c.data_files.push_back(n.Scalar());
    } else {
      c.data_files = r.string_list(n, "data_files");
    }
  }
  if (auto n = require("id_field")) c.id_field = r.str(n, "id_field").value_or("");
  if (auto n = require("text_field")) {
    if (n.IsSequence()) {
      c.text_field_is_list = true;
      c.text_fields = r.string_list(n, "text_field");
    } else if (auto s = r.str(n, "text_field")) {
      c.text_fields.push_back(*s);
    }
  }
  if (root["image_fields"]) c.image_fields = r.string_list(root["image_fields"], "image_fields");

  if (auto n = require("schemes"); n && r.expect_seq(n, "schemes")) {
    for (std::size_t i = 0; i < n.size(); ++i) c.schemes.push_back(read_scheme(r, n[i], "schemes[" + std::to_string(i) + "]"));
  }

  if (const auto n = root["instructions"]) {
    if (r.expect_map(n, "instructions")) {
      r.check_keys(n, "instructions", {"url", "html"});
      if (n["url"] && n["html"]) r.fail(n, "instructions", "give either url or html, not both");
      if (n["url"]) {
        c.instructions = {Instructions::Kind::url, r.str(n["url"], "instructions.url").value_or("")};
      } else if (n["html"]) {
        c.instructions = {Instructions::Kind::html, r.str(n["html"], "instructions.html").value_or("")};
      }
    }
  }
  if (const auto n = root["template_override"]) c.template_override = r.str(n, "template_override");

  if (const auto n = root["highlight"]; n && r.expect_map(n, "highlight")) {
    r.check_keys(n, "highlight", {"keyword_groups", "decoy_rate"});
    HighlightConfig h;
    if (const auto groups = n["keyword_groups"]; groups && r.expect_map(groups, "highlight.keyword_groups")) {
      for (const auto& kv : groups) {
        KeywordGroup g;
        g.name = kv.first.as<std::string>();
        g.patterns = r.string_list(kv.second, "highlight.keyword_groups." + g.name);
        h.keyword_groups.push_back(std::move(g));
      }
    }
    if (n["decoy_rate"]) h.decoy_rate = r.real(n["decoy_rate"], "highlight.decoy_rate").value_or(0.0);
    c.highlight = std::move(h);
  }

  if (const auto n = root["active_learning"]; n && r.expect_map(n, "active_learning")) {
    r.check_keys(n, "active_learning",
                 {"retrain_every", "random_ratio", "target_scheme", "min_labels_to_start", "confidence", "seed"});
    ActiveLearningConfig al;
    if (n["retrain_every"]) al.retrain_every = r.integer(n["retrain_every"], "active_learning.retrain_every").value_or(0);
    if (n["random_ratio"]) al.random_ratio = r.real(n["random_ratio"], "active_learning.random_ratio").value_or(-1);
    if (n["target_scheme"]) {
      al.target_scheme = r.str(n["target_scheme"], "active_learning.target_scheme").value_or("");
    } else {
      r.fail(n, "active_learning.target_scheme", "missing required key");
    }
    if (n["min_labels_to_start"]) {
      al.min_labels_to_start = r.integer(n["min_labels_to_start"], "active_learning.min_labels_to_start").value_or(0);
    }
    if (n["confidence"]) {
      al.confidence = r.enumeration(kConfidence, n["confidence"], "active_learning.confidence")
                          .value_or(ConfidenceMeasure::least_confidence);
    }
    if (n["seed"]) al.seed = r.u64(n["seed"], "active_learning.seed").value_or(0);
    c.active_learning = std::move(al);
  }

  if (const auto n = root["quality_control"]; n && r.expect_map(n, "quality_control")) {
    r.check_keys(n, "quality_control", {"prestudy", "attention", "pre_surveys", "post_surveys"});
    QualityControlConfig q;
    if (const auto p = n["prestudy"]; p && r.expect_map(p, "quality_control.prestudy")) {
      r.check_keys(p, "quality_control.prestudy", {"items", "pass_threshold"});
      PrestudyConfig ps;
      if (p["items"]) ps.items = read_gold_list(r, p["items"], "quality_control.prestudy.items");
      if (p["pass_threshold"]) {
        ps.pass_threshold = r.real(p["pass_threshold"], "quality_control.prestudy.pass_threshold").value_or(-1);
      }
      q.prestudy = std::move(ps);
    }
    if (const auto a = n["attention"]; a && r.expect_map(a, "quality_control.attention")) {
      r.check_keys(a, "quality_control.attention", {"items", "insertion_rate", "fail_threshold", "on_fail"});
      AttentionConfig at;
      if (a["items"]) at.items = read_gold_list(r, a["items"], "quality_control.attention.items");
      if (a["insertion_rate"]) {
        at.insertion_rate = r.real(a["insertion_rate"], "quality_control.attention.insertion_rate").value_or(-1);
      }
      if (a["fail_threshold"]) {
        at.fail_threshold = r.integer(a["fail_threshold"], "quality_control.attention.fail_threshold").value_or(0);
      }
      if (a["on_fail"]) {
        at.on_fail = r.enumeration(kOnFail, a["on_fail"], "quality_control.attention.on_fail").value_or(OnFail::flag);
      }
      q.attention = std::move(at);
    }
    if (n["pre_surveys"]) q.pre_surveys = read_survey_list(r, n["pre_surveys"], "quality_control.pre_surveys");
    if (n["post_surveys"]) q.post_surveys = read_survey_list(r, n["post_surveys"], "quality_control.post_surveys");
    c.quality_control = std::move(q);
  }

  if (const auto n = root["assignment"]; n && r.expect_map(n, "assignment")) {
    r.check_keys(n, "assignment", {"annotations_per_instance", "max_instances_per_annotator", "ordering", "seed"});
    auto& a = c.assignment;
    if (n["annotations_per_instance"]) {
      a.annotations_per_instance = r.integer(n["annotations_per_instance"], "assignment.annotations_per_instance").value_or(-1);
    }
    if (n["max_instances_per_annotator"]) {
      a.max_instances_per_annotator = r.integer(n["max_instances_per_annotator"], "assignment.max_instances_per_annotator");
    }
    if (n["ordering"]) a.ordering = r.enumeration(kOrderings, n["ordering"], "assignment.ordering").value_or(Ordering::original);
    if (n["seed"]) a.seed = r.u64(n["seed"], "assignment.seed").value_or(0);
  }

  if (const auto n = root["server"]; n && r.expect_map(n, "server")) {
    r.check_keys(n, "server",
                 {"host", "port", "output_dir", "admin_user", "admin_password", "session_ttl_minutes", "completion_code",
                  "static_dir"});
    auto& s = c.server;
    if (n["host"]) s.host = r.str(n["host"], "server.host").value_or(s.host);
    if (n["port"]) s.port = r.integer(n["port"], "server.port").value_or(-1);
    if (n["output_dir"]) s.output_dir = r.str(n["output_dir"], "server.output_dir").value_or("");
    if (n["admin_user"]) s.admin_user = r.str(n["admin_user"], "server.admin_user").value_or("");
    if (n["admin_password"]) s.admin_password = r.str(n["admin_password"], "server.admin_password").value_or("");
    if (n["session_ttl_minutes"]) {
      s.session_ttl_minutes = r.integer(n["session_ttl_minutes"], "server.session_ttl_minutes").value_or(0);
    }
    if (n["completion_code"]) s.completion_code = r.str(n["completion_code"], "server.completion_code").value_or("");
    if (n["static_dir"]) s.static_dir = r.str(n["static_dir"], "server.static_dir").value_or("");
  }

  if (const auto n = root["login_mode"]) {
    c.login_mode = r.enumeration(kLoginModes, n, "login_mode").value_or(LoginMode::email_signup);
  }
}

int line_for(const std::map<std::string, int>& lines, std::string field) {
  while (true) {
    if (const auto it = lines.find(field); it != lines.end()) return it->second;
    const auto cut = field.find_last_of(".[");
    if (cut == std::string::npos) return 0;
    field.resize(cut);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// semantic validation

namespace {

bool in_unit_closed(double v) { return v >= 0.0 && v <= 1.0; }

void validate_scheme(const AnnotationScheme& s, const std::string& path, std::vector<ConfigIssue>& out) {
  if (s.name.empty()) out.push_back({path + ".name", "scheme name must be non-empty"});
  const bool needs_options = s.kind == SchemeKind::multiselect || s.kind == SchemeKind::radio ||
                             s.kind == SchemeKind::dropdown || s.kind == SchemeKind::best_worst ||
                             s.kind == SchemeKind::span;
  if (needs_options && s.options.empty()) {
    out.push_back({path + ".options", "options must be non-empty for " + std::string(to_string(s.kind))});
  }
  if ((s.kind == SchemeKind::free_text || s.kind == SchemeKind::number) && !s.options.empty()) {
    out.push_back({path + ".options", std::string(to_string(s.kind)) + " schemes take no options"});
  }
  if (s.kind == SchemeKind::likert && s.likert_size < 2) {
    out.push_back({path + ".likert_size", "likert_size must be at least 2"});
  }
  if (s.kind != SchemeKind::likert && s.likert_size != 0) {
    out.push_back({path + ".likert_size", "likert_size applies to likert schemes only"});
  }
  std::set<std::string> values;
  std::set<std::string> displays;
  for (std::size_t i = 0; i < s.options.size(); ++i) {
    const auto& o = s.options[i];
    const std::string opath = path + ".options[" + std::to_string(i) + "]";
    if (o.value.empty()) out.push_back({opath + ".value", "option value must be non-empty"});
    if (!values.insert(o.value).second) out.push_back({opath + ".value", "duplicate option value '" + o.value + "'"});
    if (!displays.insert(o.display).second) {
      out.push_back({opath + ".display", "duplicate option display name '" + o.display + "'"});
    }
    if (o.key && code_point_length(*o.key) != 1) {
      out.push_back({opath + ".key", "keybinding must be a single key, got '" + *o.key + "'"});
    }
  }
}

void validate_gold(const TaskConfig& c, const std::vector<GoldItem>& items, const std::string& path,
                   std::vector<ConfigIssue>& out) {
  const RecordLayout layout{c.id_field, c.text_fields, c.text_field_is_list, c.image_fields};
  std::set<std::string> ids;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& g = items[i];
    const std::string gpath = path + "[" + std::to_string(i) + "]";
    if (g.id.empty()) out.push_back({gpath + ".id", "gold item id must be non-empty"});
    if (!ids.insert(g.id).second) out.push_back({gpath + ".id", "duplicate gold item id '" + g.id + "'"});
    auto record = g.fields;
    if (!record.contains(c.id_field)) record[c.id_field] = g.id;
    std::string err;
    const auto instance = instance_from_record(record, layout, &err);
    if (!instance) {
      out.push_back({gpath + ".fields", err});
      continue;
    }
    if (!g.answers.is_object() || g.answers.empty()) {
      out.push_back({gpath + ".answers", "gold answers must name at least one scheme"});
      continue;
    }
    for (auto it = g.answers.begin(); it != g.answers.end(); ++it) {
      const auto* scheme = c.find_scheme(it.key());
      if (!scheme) {
        out.push_back({gpath + ".answers." + it.key(), "unknown scheme '" + it.key() + "'"});
        continue;
      }
      std::string derr;
      const auto value = decode_label(*scheme, *it, &derr);
      if (!value) {
        out.push_back({gpath + ".answers." + it.key(), derr});
        continue;
      }
      for (const auto& p : check_value(*scheme, *value, &*instance)) {
        out.push_back({gpath + ".answers." + it.key(), p});
      }
    }
  }
}

void validate_surveys(const std::vector<SurveyPage>& pages, const std::string& path, std::vector<ConfigIssue>& out) {
  for (std::size_t i = 0; i < pages.size(); ++i) {
    const auto& page = pages[i];
    const std::string ppath = path + "[" + std::to_string(i) + "]";
    if (!page.template_id && page.questions.empty()) {
      out.push_back({ppath + ".questions", "survey page needs questions or a template"});
    }
    for (std::size_t q = 0; q < page.questions.size(); ++q) {
      const auto& question = page.questions[q];
      const std::string qpath = ppath + ".questions[" + std::to_string(q) + "]";
      switch (question.kind) {
        case SchemeKind::radio:
        case SchemeKind::likert:
        case SchemeKind::free_text:
        case SchemeKind::number:
        case SchemeKind::dropdown:
          break;
        default:
          out.push_back({qpath + ".kind", "survey questions must be radio, likert, free_text, number or dropdown"});
      }
      validate_scheme(question, qpath, out);
    }
    std::set<std::string> names;
    for (const auto& q : survey_questions(page)) {
      if (!names.insert(q.name).second) {
        out.push_back({ppath + ".questions", "duplicate question name '" + q.name + "' on page"});
      }
    }
  }
}

}  // namespace

std::vector<ConfigIssue> validate_config(const TaskConfig& c, bool check_files) {
  std::vector<ConfigIssue> out;
  if (c.task_name.empty()) out.push_back({"task_name", "task_name must be non-empty"});
  if (c.data_files.empty()) out.push_back({"data_files", "data_files must be non-empty"});
  for (std::size_t i = 0; i < c.data_files.size(); ++i) {
    const std::string path = "data_files[" + std::to_string(i) + "]";
    const auto& f = c.data_files[i];
    const auto ext = fs::path(f).extension().string();
    if (ext != ".csv" && ext != ".tsv" && ext != ".jsonl") {
      out.push_back({path, "unsupported data file extension '" + ext + "' (use .csv, .tsv or .jsonl)"});
    }
    if (check_files && !fs::is_regular_file(c.resolve(f))) {
      out.push_back({path, "data file not found: " + c.resolve(f).string()});
    }
  }
  if (c.id_field.empty()) out.push_back({"id_field", "id_field must be non-empty"});
  if (c.text_fields.empty()) out.push_back({"text_field", "text_field must name at least one field"});
  {
    std::set<std::string> seen;
    for (const auto& t : c.text_fields) {
      if (t.empty()) out.push_back({"text_field", "text field names must be non-empty"});
      if (t == c.id_field) out.push_back({"text_field", "text field '" + t + "' is also the id_field"});
      if (!seen.insert(t).second) out.push_back({"text_field", "duplicate text field '" + t + "'"});
    }
  }
  for (const auto& f : c.image_fields) {
    if (std::find(c.text_fields.begin(), c.text_fields.end(), f) == c.text_fields.end()) {
      out.push_back({"image_fields", "image field '" + f + "' is not one of the text fields"});
    }
  }

  if (c.schemes.empty()) out.push_back({"schemes", "schemes must be non-empty"});
  {
    std::set<std::string> names;
    std::map<std::string, std::string> keys;
    for (std::size_t i = 0; i < c.schemes.size(); ++i) {
      const auto& s = c.schemes[i];
      const std::string path = "schemes[" + std::to_string(i) + "]";
      validate_scheme(s, path, out);
      if (!s.name.empty() && !names.insert(s.name).second) {
        out.push_back({path + ".name", "duplicate scheme name '" + s.name + "'"});
      }
      for (std::size_t k = 0; k < s.options.size(); ++k) {
        const auto& o = s.options[k];
        if (!o.key) continue;
        const std::string owner = s.name + "/" + o.value;
        const auto [it, fresh] = keys.emplace(*o.key, owner);
        if (!fresh) {
          out.push_back({path + ".options[" + std::to_string(k) + "].key",
                         "keybinding '" + *o.key + "' already used by " + it->second});
        }
      }
    }
  }

  if (c.instructions.kind != Instructions::Kind::none && c.instructions.content.empty()) {
    out.push_back({"instructions", "instructions must not be empty"});
  }

  const auto& a = c.assignment;
  if (a.annotations_per_instance < 0) {
    out.push_back({"assignment.annotations_per_instance", "annotations_per_instance must be >= 0"});
  }
  if (a.max_instances_per_annotator && *a.max_instances_per_annotator < 1) {
    out.push_back({"assignment.max_instances_per_annotator", "max_instances_per_annotator must be positive"});
  }
  if (a.ordering == Ordering::active_learning && !c.active_learning) {
    out.push_back({"assignment.ordering", "ordering is active_learning but no active_learning block is configured"});
  }

  if (c.active_learning) {
    const auto& al = *c.active_learning;
    if (al.retrain_every < 1) out.push_back({"active_learning.retrain_every", "retrain_every must be positive"});
    if (!in_unit_closed(al.random_ratio)) {
      out.push_back({"active_learning.random_ratio", "random_ratio must be in [0, 1]"});
    }
    if (al.min_labels_to_start < 1) {
      out.push_back({"active_learning.min_labels_to_start", "min_labels_to_start must be positive"});
    }
    const auto* target = c.find_scheme(al.target_scheme);
    if (!target) {
      out.push_back({"active_learning.target_scheme", "unknown scheme '" + al.target_scheme + "'"});
    } else if (target->kind != SchemeKind::radio && target->kind != SchemeKind::multiselect) {
      out.push_back({"active_learning.target_scheme", "target scheme must be radio or multiselect"});
    }
  }

  if (c.highlight) {
    const auto& h = *c.highlight;
    if (!(h.decoy_rate >= 0.0 && h.decoy_rate < 1.0)) {
      out.push_back({"highlight.decoy_rate", "decoy_rate must be in [0, 1)"});
    }
    std::set<std::string> groups;
    for (const auto& g : h.keyword_groups) {
      const std::string path = "highlight.keyword_groups." + g.name;
      if (g.name.empty()) out.push_back({path, "keyword group name must be non-empty"});
      if (!groups.insert(g.name).second) out.push_back({path, "duplicate keyword group"});
      if (g.patterns.empty()) out.push_back({path, "keyword group must list at least one pattern"});
      for (const auto& p : g.patterns) {
        if (!is_valid_keyword_pattern(p)) {
          out.push_back({path, "invalid keyword pattern '" + p +
                                   "' (use a single word, optionally ending in '*'; regular expressions are not supported)"});
        }
      }
    }
  }

  if (c.quality_control) {
    const auto& q = *c.quality_control;
    if (q.prestudy) {
      const auto& p = *q.prestudy;
      if (!(p.pass_threshold > 0.0 && p.pass_threshold <= 1.0)) {
        out.push_back({"quality_control.prestudy.pass_threshold", "pass_threshold must be in (0, 1]"});
      }
      if (p.items.empty()) out.push_back({"quality_control.prestudy.items", "prestudy needs at least one test item"});
      validate_gold(c, p.items, "quality_control.prestudy.items", out);
    }
    if (q.attention) {
      const auto& at = *q.attention;
      if (!(at.insertion_rate >= 0.0 && at.insertion_rate < 1.0)) {
        out.push_back({"quality_control.attention.insertion_rate", "insertion_rate must be in [0, 1)"});
      }
      if (at.fail_threshold < 1) {
        out.push_back({"quality_control.attention.fail_threshold", "fail_threshold must be positive"});
      }
      if (at.items.empty()) out.push_back({"quality_control.attention.items", "attention tests need at least one item"});
      validate_gold(c, at.items, "quality_control.attention.items", out);
    }
    validate_surveys(q.pre_surveys, "quality_control.pre_surveys", out);
    validate_surveys(q.post_surveys, "quality_control.post_surveys", out);
  }

  const auto& s = c.server;
  if (s.port < 0 || s.port > 65535) out.push_back({"server.port", "port must be in [0, 65535]"});
  if (s.output_dir.empty()) out.push_back({"server.output_dir", "output_dir must be non-empty"});
  if (s.session_ttl_minutes < 1) out.push_back({"server.session_ttl_minutes", "session_ttl_minutes must be positive"});

  if (c.template_override) {
    const auto path = c.resolve(*c.template_override);
    std::string text = c.template_text;
    if (check_files) {
      std::ifstream in(path, std::ios::binary);
      if (!in) {
        out.push_back({"template_override", "template file not found: " + path.string()});
      } else {
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
      }
    }
    if (!text.empty()) {
      const auto check = validate_template(text, c);
      for (const auto& e : check.errors) out.push_back({"template_override", e});
    }
  }
  return out;
}

std::vector<ConfigIssue> config_warnings(const TaskConfig& c) {
  std::vector<ConfigIssue> out;
  if (c.template_override && !c.template_text.empty()) {
    for (const auto& w : validate_template(c.template_text, c).warnings) out.push_back({"template_override", w});
  }
  return out;
}

// ---------------------------------------------------------------------------
// loading

TaskConfig parse_config(std::string_view yaml_text, const fs::path& base_dir, bool check_files) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError({{"", "parse error: " + e.msg, e.mark.line + 1}});
  }
  if (!root.IsMap()) throw ConfigError({{"", "configuration must be a mapping at top level", 1}});

  Reader reader;
  TaskConfig config;
  config.base_dir = base_dir;
  read_top_level(reader, root, config);
  if (!reader.issues.empty()) {
    std::stable_sort(reader.issues.begin(), reader.issues.end(),
                     [](const ConfigIssue& a, const ConfigIssue& b) { return a.line < b.line; });
    throw ConfigError(std::move(reader.issues));
  }

  auto issues = validate_config(config, check_files);
  if (!issues.empty()) {
    for (auto& i : issues) i.line = line_for(reader.lines, i.field);
    throw ConfigError(std::move(issues));
  }
  if (config.template_override && check_files) {
    std::ifstream in(config.resolve(*config.template_override), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    config.template_text = ss.str();
  }
  return config;
}

TaskConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({{"", "config file not found: " + path.string(), 0}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), fs::absolute(path).parent_path(), true);
}

// ---------------------------------------------------------------------------
// serialization

namespace {

bool needs_quotes(const std::string& s) {
  if (s.empty()) return true;
  if (s == "true" || s == "false" || s == "True" || s == "False" || s == "null" || s == "~" || s == "yes" ||
      s == "no" || s == "on" || s == "off" || s == "Yes" || s == "No" || s == "y" || s == "n") {
    return true;
  }
  double d = 0;
  if (auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d); ec == std::errc() && p == s.data() + s.size()) {
    return true;
  }
  return s.front() == ' ' || s.back() == ' ';
}

void emit_str(YAML::Emitter& out, const std::string& s) {
  if (needs_quotes(s)) {
    out << YAML::DoubleQuoted << s;
  } else {
    out << s;
  }
}

void emit_double(YAML::Emitter& out, double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, p);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  out << s;
}

void emit_json(YAML::Emitter& out, const nlohmann::json& j) {
  if (j.is_object()) {
    out << YAML::BeginMap;
    for (auto it = j.begin(); it != j.end(); ++it) {
      out << YAML::Key;
      emit_str(out, it.key());
      out << YAML::Value;
      emit_json(out, *it);
    }
    out << YAML::EndMap;
  } else if (j.is_array()) {
    out << YAML::BeginSeq;
    for (const auto& v : j) emit_json(out, v);
    out << YAML::EndSeq;
  } else if (j.is_string()) {
    emit_str(out, j.get<std::string>());
  } else if (j.is_boolean()) {
    out << (j.get<bool>() ? "true" : "false");
  } else if (j.is_number_integer()) {
    out << j.get<std::int64_t>();
  } else if (j.is_number_float()) {
    emit_double(out, j.get<double>());
  } else {
    out << YAML::Null;
  }
}

void emit_option(YAML::Emitter& out, const Option& o) {
  if (o.display == o.value && !o.display_is_media && !o.key && !o.tooltip) {
    emit_str(out, o.value);
    return;
  }
  out << YAML::BeginMap;
  out << YAML::Key << "value" << YAML::Value;
  emit_str(out, o.value);
  if (o.display != o.value) {
    out << YAML::Key << "display" << YAML::Value;
    emit_str(out, o.display);
  }
  if (o.display_is_media) out << YAML::Key << "media" << YAML::Value << true;
  if (o.key) {
    out << YAML::Key << "key" << YAML::Value;
    emit_str(out, *o.key);
  }
  if (o.tooltip) {
    out << YAML::Key << "tooltip" << YAML::Value;
    emit_str(out, *o.tooltip);
  }
  out << YAML::EndMap;
}

void emit_scheme(YAML::Emitter& out, const AnnotationScheme& s) {
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value;
  emit_str(out, s.name);
  out << YAML::Key << "kind" << YAML::Value << std::string(to_string(s.kind));
  if (!s.description.empty()) {
    out << YAML::Key << "description" << YAML::Value;
    emit_str(out, s.description);
  }
  if (!s.required) out << YAML::Key << "required" << YAML::Value << false;
  if (s.likert_size != 0) out << YAML::Key << "likert_size" << YAML::Value << s.likert_size;
  if (!s.min_label.empty()) {
    out << YAML::Key << "min_label" << YAML::Value;
    emit_str(out, s.min_label);
  }
  if (!s.max_label.empty()) {
    out << YAML::Key << "max_label" << YAML::Value;
    emit_str(out, s.max_label);
  }
  if (!s.options.empty()) {
    out << YAML::Key << "options" << YAML::Value << YAML::BeginSeq;
    for (const auto& o : s.options) emit_option(out, o);
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
}

void emit_gold_list(YAML::Emitter& out, const std::vector<GoldItem>& items) {
  out << YAML::BeginSeq;
  for (const auto& g : items) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value;
    emit_str(out, g.id);
    if (!g.fields.empty()) {
      out << YAML::Key << "fields" << YAML::Value;
      emit_json(out, g.fields);
    }
    out << YAML::Key << "answers" << YAML::Value;
    emit_json(out, g.answers);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
}

void emit_surveys(YAML::Emitter& out, const std::vector<SurveyPage>& pages) {
  out << YAML::BeginSeq;
  for (const auto& p : pages) {
    out << YAML::BeginMap;
    out << YAML::Key << "title" << YAML::Value;
    emit_str(out, p.title);
    if (p.template_id) out << YAML::Key << "template" << YAML::Value << std::string(to_string(*p.template_id));
    if (!p.questions.empty()) {
      out << YAML::Key << "questions" << YAML::Value << YAML::BeginSeq;
      for (const auto& q : p.questions) emit_scheme(out, q);
      out << YAML::EndSeq;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
}

void emit_string_list(YAML::Emitter& out, const std::vector<std::string>& items, bool flow) {
  if (flow) out << YAML::Flow;
  out << YAML::BeginSeq;
  for (const auto& s : items) emit_str(out, s);
  out << YAML::EndSeq;
}

}  // namespace

std::string serialize_config(const TaskConfig& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "task_name" << YAML::Value;
  emit_str(out, c.task_name);
  out << YAML::Key << "data_files" << YAML::Value;
  emit_string_list(out, c.data_files, true);
  out << YAML::Key << "id_field" << YAML::Value;
  emit_str(out, c.id_field);
  out << YAML::Key << "text_field" << YAML::Value;
  if (c.text_field_is_list) {
    emit_string_list(out, c.text_fields, true);
  } else {
    emit_str(out, c.text_fields.empty() ? std::string() : c.text_fields.front());
  }
  if (!c.image_fields.empty()) {
    out << YAML::Key << "image_fields" << YAML::Value;
    emit_string_list(out, c.image_fields, true);
  }
  out << YAML::Key << "login_mode" << YAML::Value << std::string(to_string(c.login_mode));

  if (c.instructions.kind != Instructions::Kind::none) {
    out << YAML::Key << "instructions" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << (c.instructions.kind == Instructions::Kind::url ? "url" : "html") << YAML::Value;
    emit_str(out, c.instructions.content);
    out << YAML::EndMap;
  }
  if (c.template_override) {
    out << YAML::Key << "template_override" << YAML::Value;
    emit_str(out, *c.template_override);
  }

  out << YAML::Key << "schemes" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : c.schemes) emit_scheme(out, s);
  out << YAML::EndSeq;

  out << YAML::Key << "assignment" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "annotations_per_instance" << YAML::Value << c.assignment.annotations_per_instance;
  if (c.assignment.max_instances_per_annotator) {
    out << YAML::Key << "max_instances_per_annotator" << YAML::Value << *c.assignment.max_instances_per_annotator;
  }
  out << YAML::Key << "ordering" << YAML::Value << std::string(to_string(c.assignment.ordering));
  if (c.assignment.seed != 0) out << YAML::Key << "seed" << YAML::Value << c.assignment.seed;
  out << YAML::EndMap;

  if (c.highlight) {
    out << YAML::Key << "highlight" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "decoy_rate" << YAML::Value;
    emit_double(out, c.highlight->decoy_rate);
    out << YAML::Key << "keyword_groups" << YAML::Value << YAML::BeginMap;
    for (const auto& g : c.highlight->keyword_groups) {
      out << YAML::Key;
      emit_str(out, g.name);
      out << YAML::Value;
      emit_string_list(out, g.patterns, true);
    }
    out << YAML::EndMap << YAML::EndMap;
  }

  if (c.active_learning) {
    const auto& al = *c.active_learning;
    out << YAML::Key << "active_learning" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "target_scheme" << YAML::Value;
    emit_str(out, al.target_scheme);
    out << YAML::Key << "retrain_every" << YAML::Value << al.retrain_every;
    out << YAML::Key << "random_ratio" << YAML::Value;
    emit_double(out, al.random_ratio);
    out << YAML::Key << "min_labels_to_start" << YAML::Value << al.min_labels_to_start;
    out << YAML::Key << "confidence" << YAML::Value << std::string(to_string(al.confidence));
    if (al.seed != 0) out << YAML::Key << "seed" << YAML::Value << al.seed;
    out << YAML::EndMap;
  }

  if (c.quality_control) {
    const auto& q = *c.quality_control;
    out << YAML::Key << "quality_control" << YAML::Value << YAML::BeginMap;
    if (q.prestudy) {
      out << YAML::Key << "prestudy" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "pass_threshold" << YAML::Value;
      emit_double(out, q.prestudy->pass_threshold);
      out << YAML::Key << "items" << YAML::Value;
      emit_gold_list(out, q.prestudy->items);
      out << YAML::EndMap;
    }
    if (q.attention) {
      out << YAML::Key << "attention" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "insertion_rate" << YAML::Value;
      emit_double(out, q.attention->insertion_rate);
      out << YAML::Key << "fail_threshold" << YAML::Value << q.attention->fail_threshold;
      out << YAML::Key << "on_fail" << YAML::Value << std::string(to_string(q.attention->on_fail));
      out << YAML::Key << "items" << YAML::Value;
      emit_gold_list(out, q.attention->items);
      out << YAML::EndMap;
    }
    if (!q.pre_surveys.empty()) {
      out << YAML::Key << "pre_surveys" << YAML::Value;
      emit_surveys(out, q.pre_surveys);
    }
    if (!q.post_surveys.empty()) {
      out << YAML::Key << "post_surveys" << YAML::Value;
      emit_surveys(out, q.post_surveys);
    }
    out << YAML::EndMap;
  }

  const auto& s = c.server;
  out << YAML::Key << "server" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "host" << YAML::Value;
  emit_str(out, s.host);
  out << YAML::Key << "port" << YAML::Value << s.port;
  out << YAML::Key << "output_dir" << YAML::Value;
  emit_str(out, s.output_dir);
  out << YAML::Key << "admin_user" << YAML::Value;
  emit_str(out, s.admin_user);
  out << YAML::Key << "admin_password" << YAML::Value;
  emit_str(out, s.admin_password);
  out << YAML::Key << "session_ttl_minutes" << YAML::Value << s.session_ttl_minutes;
  if (!s.completion_code.empty()) {
    out << YAML::Key << "completion_code" << YAML::Value;
    emit_str(out, s.completion_code);
  }
  if (!s.static_dir.empty()) {
    out << YAML::Key << "static_dir" << YAML::Value;
    emit_str(out, s.static_dir);
  }
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

// ---------------------------------------------------------------------------
// templates

TemplateCheck validate_template(std::string_view text, const TaskConfig& config) {
  TemplateCheck check;
  std::set<std::string> seen_schemes;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find("{{", pos);
    if (open == std::string_view::npos) break;
    const auto close = text.find("}}", open + 2);
    if (close == std::string_view::npos) {
      check.errors.push_back("unterminated placeholder at offset " + std::to_string(open));
      break;
    }
    std::string_view inner = text.substr(open + 2, close - open - 2);
    while (!inner.empty() && (inner.front() == ' ' || inner.front() == '\t')) inner.remove_prefix(1);
    while (!inner.empty() && (inner.back() == ' ' || inner.back() == '\t')) inner.remove_suffix(1);
    const std::string name(inner);
    PlaceholderBinding binding{name, BindingKind::field, open};
    bool known = true;
    if (name == config.id_field ||
        std::find(config.text_fields.begin(), config.text_fields.end(), name) != config.text_fields.end()) {
      binding.kind = BindingKind::field;
    } else if (config.find_scheme(name)) {
      binding.kind = BindingKind::scheme;
      seen_schemes.insert(name);
    } else if (name.rfind("meta.", 0) == 0 && name.size() > 5) {
      binding.kind = BindingKind::meta;
    } else if (name == "instructions" || name == "progress") {
      binding.kind = BindingKind::builtin;
    } else {
      known = false;
      check.errors.push_back("unknown placeholder '{{" + name + "}}'");
    }
    if (known) check.bindings.push_back(std::move(binding));
    pos = close + 2;
  }
  for (const auto& s : config.schemes) {
    if (!seen_schemes.count(s.name)) check.warnings.push_back("scheme '" + s.name + "' does not appear in the template");
  }
  return check;
}

}  // namespace annoserve
