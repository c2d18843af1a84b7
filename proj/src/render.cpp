#include "annoserve/render.hpp"

namespace annoserve {

std::string_view to_string(StepKind k) {
  switch (k) {
    case StepKind::pre_survey: return "pre_survey";
    case StepKind::prestudy: return "prestudy";
    case StepKind::instance: return "instance";
    case StepKind::post_survey: return "post_survey";
    case StepKind::done: return "done";
    case StepKind::blocked: return "blocked";
  }
  return "instance";
}

Widget build_widget(const AnnotationScheme& scheme, const Instance* instance) {
  Widget w;
  w.scheme = scheme.name;
  w.kind = scheme.kind;
  w.description = scheme.description;
  w.required = scheme.required;
  w.likert_size = scheme.likert_size;
  w.min_label = scheme.min_label;
  w.max_label = scheme.max_label;
  for (const auto& o : scheme.options) w.options.push_back({o.value, o.display, o.display_is_media, o.key, o.tooltip});
  if (scheme.kind == SchemeKind::best_worst) {
    if (instance) {
      w.slots = best_worst_slots(scheme, *instance);
    } else {
      for (const auto& o : scheme.options) w.slots.push_back(o.value);
    }
  }
  return w;
}

namespace {

std::string codebook_link(const TaskConfig& config) {
  return config.instructions.kind == Instructions::Kind::url ? config.instructions.content : "#instructions";
}

}  // namespace

RenderModel build_render_model(const TaskConfig& config, const Instance& instance,
                               const std::vector<HighlightSpan>& highlights, const ProgressInfo& progress) {
  RenderModel m;
  m.step = StepKind::instance;
  for (std::size_t i = 0; i < instance.documents.size(); ++i) {
    m.documents.push_back({instance.keys[i], instance.documents[i].kind, instance.documents[i].payload});
  }
  m.display_meta = instance.display_meta;
  for (const auto& s : config.schemes) m.widgets.push_back(build_widget(s, &instance));
  for (const auto& h : highlights) m.highlights.push_back({h.document_index, h.start, h.end, h.group});
  m.instructions = config.instructions;
  m.progress = progress;
  m.codebook_url = codebook_link(config);
  if (config.template_override && !config.template_text.empty()) {
    m.layout_template = config.template_text;
    m.layout = validate_template(config.template_text, config).bindings;
  }
  return m;
}

RenderModel build_survey_model(const TaskConfig& config, const std::string& title,
                               const std::vector<AnnotationScheme>& questions, StepKind step,
                               const ProgressInfo& progress) {
  RenderModel m;
  m.step = step;
  m.title = title;
  for (const auto& q : questions) m.widgets.push_back(build_widget(q, nullptr));
  m.instructions = config.instructions;
  m.progress = progress;
  m.codebook_url = codebook_link(config);
  return m;
}

nlohmann::json to_json(const RenderModel& m) {
  using nlohmann::json;
  json j;
  j["step"] = std::string(to_string(m.step));
  j["item_key"] = m.item_key;
  if (!m.title.empty()) j["title"] = m.title;
  json docs = json::array();
  for (const auto& d : m.documents) {
    docs.push_back({{"key", d.key}, {"kind", d.kind == DocumentKind::text ? "text" : "image"}, {"content", d.payload}});
  }
  j["documents"] = std::move(docs);
  j["display_meta"] = m.display_meta;
  json widgets = json::array();
  for (const auto& w : m.widgets) {
    json wj;
    wj["scheme"] = w.scheme;
    wj["kind"] = std::string(to_string(w.kind));
    wj["description"] = w.description;
    wj["required"] = w.required;
    json opts = json::array();
    for (const auto& o : w.options) {
      json oj{{"value", o.value}, {"display", o.display}, {"media", o.media}};
      oj["key"] = o.key ? json(*o.key) : json(nullptr);
      oj["tooltip"] = o.tooltip ? json(*o.tooltip) : json(nullptr);
      opts.push_back(std::move(oj));
    }
    wj["options"] = std::move(opts);
    if (w.kind == SchemeKind::likert) {
      wj["likert_size"] = w.likert_size;
      wj["min_label"] = w.min_label;
      wj["max_label"] = w.max_label;
    }
    if (w.kind == SchemeKind::best_worst) wj["slots"] = w.slots;
    if (w.kind == SchemeKind::span) {
      json labels = json::array();
      for (const auto& o : w.options) labels.push_back(o.value);
      wj["span_labels"] = std::move(labels);
    }
    widgets.push_back(std::move(wj));
  }
  j["widgets"] = std::move(widgets);
  json hl = json::array();
  for (const auto& h : m.highlights) {
    hl.push_back({{"doc", h.document_index}, {"start", h.start}, {"end", h.end}, {"group", h.group}});
  }
  j["highlights"] = std::move(hl);
  json instr{{"collapsible", true}};
  switch (m.instructions.kind) {
    case Instructions::Kind::none: instr["kind"] = "none"; break;
    case Instructions::Kind::url: instr["kind"] = "url"; break;
    case Instructions::Kind::html: instr["kind"] = "html"; break;
  }
  instr["content"] = m.instructions.content;
  j["instructions"] = std::move(instr);
  j["progress"] = {{"completed", m.progress.completed},
                   {"total", m.progress.total},
                   {"remaining", m.progress.remaining},
                   {"codebook_url", m.codebook_url}};
  if (m.layout_template) {
    json bindings = json::array();
    for (const auto& b : m.layout) {
      const char* kind = b.kind == BindingKind::field    ? "field"
                         : b.kind == BindingKind::scheme ? "scheme"
                         : b.kind == BindingKind::meta   ? "meta"
                                                         : "builtin";
      bindings.push_back({{"placeholder", b.placeholder}, {"kind", kind}, {"offset", b.offset}});
    }
    j["layout"] = {{"mode", "template"}, {"template", *m.layout_template}, {"bindings", std::move(bindings)}};
  } else {
    j["layout"] = {{"mode", "default"}, {"text_above_widgets", true}};
  }
  j["stored"] = m.stored;
  j["revision"] = m.revision;
  j["navigation"] = {{"can_back", m.can_back}, {"can_forward", m.can_forward}};
  if (!m.message.empty()) j["message"] = m.message;
  if (!m.notice.empty()) j["notice"] = m.notice;
  return j;
}

}  // namespace annoserve
