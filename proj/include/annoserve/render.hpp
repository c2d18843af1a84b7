#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "annoserve/config.hpp"
#include "annoserve/highlight.hpp"
#include "annoserve/instance.hpp"

namespace annoserve {

struct ProgressInfo {
  std::size_t completed = 0;
  std::size_t total = 0;
  std::size_t remaining = 0;
  static ProgressInfo of(std::size_t completed, std::size_t total) {
    return {completed, total, total >= completed ? total - completed : 0};
  }
  bool operator==(const ProgressInfo&) const = default;
};

struct WidgetOption {
  std::string value;
  std::string display;
  bool media = false;
  std::optional<std::string> key;
  std::optional<std::string> tooltip;
  bool operator==(const WidgetOption&) const = default;
};

/// Presentation-free description of one scheme's input widget.
struct Widget {
  std::string scheme;
  SchemeKind kind = SchemeKind::radio;
  std::string description;
  bool required = true;
  std::vector<WidgetOption> options;
  int likert_size = 0;
  std::string min_label;
  std::string max_label;
  // best_worst candidates: document keys for multi-document instances,
  // otherwise option values
  std::vector<std::string> slots;
  bool operator==(const Widget&) const = default;
};

struct RenderDocument {
  std::string key;
  DocumentKind kind = DocumentKind::text;
  std::string payload;
  bool operator==(const RenderDocument&) const = default;
};

/// Highlight as shown to the annotator; keyword and decoy highlights are
/// indistinguishable here.
struct RenderHighlight {
  std::size_t document_index = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string group;
  bool operator==(const RenderHighlight&) const = default;
};

enum class StepKind { pre_survey, prestudy, instance, post_survey, done, blocked };
std::string_view to_string(StepKind k);

struct RenderModel {
  StepKind step = StepKind::instance;
  std::string item_key;
  std::string title;  // survey page title
  std::vector<RenderDocument> documents;
  std::map<std::string, std::string> display_meta;
  std::vector<Widget> widgets;
  std::vector<RenderHighlight> highlights;
  Instructions instructions;
  ProgressInfo progress;
  std::string codebook_url;
  // custom layout: template text plus its bindings in document order
  std::optional<std::string> layout_template;
  std::vector<PlaceholderBinding> layout;
  nlohmann::json stored = nlohmann::json::object();  // previously submitted values
  std::size_t revision = 0;
  bool can_back = false;
  bool can_forward = false;
  std::string message;  // completion code / blocked notice
  std::string notice;   // e.g. navigation refused at the frontier
  bool operator==(const RenderModel&) const = default;
};

Widget build_widget(const AnnotationScheme& scheme, const Instance* instance);

/// Pure: same inputs give an identical model. Documents keep instance order
/// and precede widgets in the default layout; widgets follow config order.
RenderModel build_render_model(const TaskConfig& config, const Instance& instance,
                               const std::vector<HighlightSpan>& highlights, const ProgressInfo& progress);

/// Survey page model: widgets only.
RenderModel build_survey_model(const TaskConfig& config, const std::string& title,
                               const std::vector<AnnotationScheme>& questions, StepKind step,
                               const ProgressInfo& progress);

nlohmann::json to_json(const RenderModel& model);

}  // namespace annoserve
