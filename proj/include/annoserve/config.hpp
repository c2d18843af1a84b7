#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "annoserve/scheme.hpp"

namespace annoserve {

enum class LoginMode { email_signup, url_argument, both };
enum class Ordering { original, random, active_learning };
enum class ConfidenceMeasure { least_confidence, margin, entropy };
enum class OnFail { flag, block };
enum class SurveyTemplate { consent, demographics };

std::string_view to_string(LoginMode v);
std::string_view to_string(Ordering v);
std::string_view to_string(ConfidenceMeasure v);
std::string_view to_string(OnFail v);
std::string_view to_string(SurveyTemplate v);

struct Instructions {
  enum class Kind { none, url, html };
  Kind kind = Kind::none;
  std::string content;
  bool operator==(const Instructions&) const = default;
};

struct AssignmentConfig {
  int annotations_per_instance = 0;  // 0 = every annotator labels every instance
  std::optional<int> max_instances_per_annotator;
  Ordering ordering = Ordering::original;
  std::uint64_t seed = 0;
  bool operator==(const AssignmentConfig&) const = default;
};

struct ActiveLearningConfig {
  int retrain_every = 20;
  double random_ratio = 0.0;
  std::string target_scheme;
  int min_labels_to_start = 10;
  ConfidenceMeasure confidence = ConfidenceMeasure::least_confidence;
  std::uint64_t seed = 0;
  bool operator==(const ActiveLearningConfig&) const = default;
};

struct KeywordGroup {
  std::string name;
  std::vector<std::string> patterns;
  bool operator==(const KeywordGroup&) const = default;
};

struct HighlightConfig {
  std::vector<KeywordGroup> keyword_groups;
  double decoy_rate = 0.0;
  std::size_t pattern_count() const;
  bool operator==(const HighlightConfig&) const = default;
};

/// A gold-labeled item: record fields in the same shape as a data-file
/// record plus expected answers in the label wire encoding.
struct GoldItem {
  std::string id;
  nlohmann::json fields = nlohmann::json::object();
  nlohmann::json answers = nlohmann::json::object();
  bool operator==(const GoldItem&) const = default;
};

struct PrestudyConfig {
  std::vector<GoldItem> items;
  double pass_threshold = 1.0;
  bool operator==(const PrestudyConfig&) const = default;
};

struct AttentionConfig {
  std::vector<GoldItem> items;
  double insertion_rate = 0.0;
  int fail_threshold = 1;
  OnFail on_fail = OnFail::flag;
  bool operator==(const AttentionConfig&) const = default;
};

struct SurveyPage {
  std::string title;
  std::optional<SurveyTemplate> template_id;
  std::vector<AnnotationScheme> questions;
  bool operator==(const SurveyPage&) const = default;
};

struct QualityControlConfig {
  std::optional<PrestudyConfig> prestudy;
  std::optional<AttentionConfig> attention;
  std::vector<SurveyPage> pre_surveys;
  std::vector<SurveyPage> post_surveys;
  bool operator==(const QualityControlConfig&) const = default;
};

struct ServerConfig {
  std::string host = "0.0.0.0";
  int port = 8000;
  std::string output_dir = "annotation_output";
  std::string admin_user = "admin";
  std::string admin_password;
  int session_ttl_minutes = 24 * 60;
  std::string completion_code;
  std::string static_dir;
  bool operator==(const ServerConfig&) const = default;
};

struct TaskConfig {
  std::string task_name;
  std::vector<std::string> data_files;
  std::string id_field;
  std::vector<std::string> text_fields;
  // text_field was written as a list (even a one-element list)
  bool text_field_is_list = false;
  std::vector<std::string> image_fields;
  std::vector<AnnotationScheme> schemes;
  Instructions instructions;
  std::optional<std::string> template_override;
  std::optional<HighlightConfig> highlight;
  std::optional<ActiveLearningConfig> active_learning;
  std::optional<QualityControlConfig> quality_control;
  AssignmentConfig assignment;
  ServerConfig server;
  LoginMode login_mode = LoginMode::email_signup;

  // Directory relative paths resolve against; not part of equality.
  std::filesystem::path base_dir;
  // Contents of template_override, read at load; not part of equality.
  std::string template_text;

  std::filesystem::path resolve(const std::string& relative) const;
  const AnnotationScheme* find_scheme(std::string_view name) const;
  std::size_t label_count() const;

  bool operator==(const TaskConfig& other) const;
};

struct ConfigIssue {
  std::string field;  // dotted path, e.g. "schemes[1].options"
  std::string message;
  int line = 0;       // 1-based; 0 when unknown
  bool operator==(const ConfigIssue&) const = default;
};

std::string format_issue(const ConfigIssue& issue);

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

/// Parses, validates and checks referenced files. Throws ConfigError listing
/// every problem found, in document order.
TaskConfig load_config(const std::filesystem::path& path);

/// Same as load_config for in-memory text; relative paths resolve against
/// `base_dir`. `check_files` disables file-existence checks when false.
TaskConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir,
                        bool check_files = true);

/// Structural and cross-reference checks on an already-built config, in a
/// stable order. Used by the loader and the wizard.
std::vector<ConfigIssue> validate_config(const TaskConfig& config, bool check_files);

/// Non-fatal findings, currently schemes missing from a custom template.
std::vector<ConfigIssue> config_warnings(const TaskConfig& config);

std::string serialize_config(const TaskConfig& config);

// ---- custom templates ----

enum class BindingKind { field, scheme, meta, builtin };

struct PlaceholderBinding {
  std::string placeholder;
  BindingKind kind = BindingKind::field;
  std::size_t offset = 0;  // byte offset of "{{" in the template
  bool operator==(const PlaceholderBinding&) const = default;
};

struct TemplateCheck {
  std::vector<PlaceholderBinding> bindings;  // document order
  std::vector<std::string> errors;           // unknown placeholders, syntax
  std::vector<std::string> warnings;         // schemes absent from the template
};

/// Placeholders are `{{ name }}`; names resolve to the id field, a text field,
/// a scheme name, `meta.<column>`, or the builtins `instructions`/`progress`.
TemplateCheck validate_template(std::string_view template_text, const TaskConfig& config);

/// Keyword patterns: one token, optionally with a trailing `*`.
bool is_valid_keyword_pattern(std::string_view pattern);

}  // namespace annoserve
