#include "annoserve/html.hpp"

#include <algorithm>
#include <sstream>

#include "annoserve/text.hpp"

namespace annoserve {

using nlohmann::json;

std::string html_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

namespace {

std::string page(const std::string& title, const std::string& body) {
  return "<!DOCTYPE html>\n<html lang=\"en\"><head><meta charset=\"utf-8\"><title>" + html_escape(title) +
         "</title></head>\n<body>\n<main>\n" + body + "</main>\n</body></html>\n";
}

// Wraps highlighted code-point ranges in <mark>; overlapping highlights after
// the first are skipped since HTML cannot nest them meaningfully.
std::string marked_text(const std::string& text, std::size_t doc, const std::vector<RenderHighlight>& highlights) {
  std::vector<RenderHighlight> spans;
  for (const auto& h : highlights) {
    if (h.document_index == doc) spans.push_back(h);
  }
  std::sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  std::string out;
  std::size_t pos = 0;
  const auto len = code_point_length(text);
  for (const auto& h : spans) {
    if (h.start < pos || h.end > len) continue;
    out += html_escape(code_point_substr(text, pos, h.start));
    out += "<mark title=\"" + html_escape(h.group) + "\">" + html_escape(code_point_substr(text, h.start, h.end)) + "</mark>";
    pos = h.end;
  }
  out += html_escape(code_point_substr(text, pos, len));
  return out;
}

std::string stored_string(const json& stored, const std::string& scheme) {
  const auto it = stored.find(scheme);
  if (it == stored.end()) return "";
  return it->is_string() ? it->get<std::string>() : it->dump();
}

bool stored_has(const json& stored, const std::string& scheme, const std::string& value) {
  const auto it = stored.find(scheme);
  if (it == stored.end()) return false;
  if (it->is_string()) return *it == value;
  if (it->is_array()) return std::find(it->begin(), it->end(), json(value)) != it->end();
  return false;
}

std::string option_label(const WidgetOption& o) {
  std::string s = html_escape(o.display);
  if (o.key) s += " <kbd>" + html_escape(*o.key) + "</kbd>";
  return s;
}

std::string widget_html(const Widget& w, const json& stored) {
  std::ostringstream out;
  const std::string field = "label." + w.scheme;
  out << "<fieldset><legend>" << html_escape(w.description.empty() ? w.scheme : w.description)
      << (w.required ? " *" : "") << "</legend>\n";
  switch (w.kind) {
    case SchemeKind::radio:
    case SchemeKind::multiselect: {
      const char* type = w.kind == SchemeKind::radio ? "radio" : "checkbox";
      for (const auto& o : w.options) {
        out << "<label" << (o.tooltip ? " title=\"" + html_escape(*o.tooltip) + "\"" : "") << "><input type=\"" << type
            << "\" name=\"" << html_escape(field) << "\" value=\"" << html_escape(o.value) << "\""
            << (o.key ? " accesskey=\"" + html_escape(*o.key) + "\"" : "")
            << (stored_has(stored, w.scheme, o.value) ? " checked" : "") << "> " << option_label(o) << "</label><br>\n";
      }
      break;
    }
    case SchemeKind::dropdown: {
      out << "<select name=\"" << html_escape(field) << "\"><option value=\"\"></option>";
      for (const auto& o : w.options) {
        out << "<option value=\"" << html_escape(o.value) << "\""
            << (stored_has(stored, w.scheme, o.value) ? " selected" : "") << ">" << html_escape(o.display)
            << "</option>";
      }
      out << "</select>\n";
      break;
    }
    case SchemeKind::best_worst: {
      const auto it = stored.find(w.scheme);
      for (const char* which : {"best", "worst"}) {
        out << "<p>" << which << ": ";
        for (const auto& slot : w.slots) {
          const bool checked = it != stored.end() && it->is_object() && it->value(which, "") == slot;
          out << "<label><input type=\"radio\" name=\"" << html_escape(field) << "." << which << "\" value=\""
              << html_escape(slot) << "\"" << (checked ? " checked" : "") << "> " << html_escape(slot) << "</label> ";
        }
        out << "</p>\n";
      }
      break;
    }
    case SchemeKind::likert: {
      out << html_escape(w.min_label) << " ";
      for (int i = 1; i <= w.likert_size; ++i) {
        const auto v = std::to_string(i);
        out << "<label><input type=\"radio\" name=\"" << html_escape(field) << "\" value=\"" << v << "\""
            << (stored_string(stored, w.scheme) == v ? " checked" : "") << "> " << v << "</label> ";
      }
      out << html_escape(w.max_label) << "\n";
      break;
    }
    case SchemeKind::free_text:
      out << "<textarea name=\"" << html_escape(field) << "\">" << html_escape(stored_string(stored, w.scheme))
          << "</textarea>\n";
      break;
    case SchemeKind::number:
      out << "<input type=\"number\" step=\"any\" name=\"" << html_escape(field) << "\" value=\""
          << html_escape(stored_string(stored, w.scheme)) << "\">\n";
      break;
    case SchemeKind::span: {
      std::string current;
      if (const auto it = stored.find(w.scheme); it != stored.end() && it->is_array()) {
        for (const auto& s : *it) {
          if (!current.empty()) current += "; ";
          current += std::to_string(s.value("doc", 0)) + ":" + std::to_string(s.value("start", 0)) + ":" +
                     std::to_string(s.value("end", 0)) + ":" + s.value("label", "");
        }
      }
      std::string labels;
      for (const auto& o : w.options) labels += (labels.empty() ? "" : ", ") + o.value;
      out << "<p>Spans as doc:start:end:label separated by ';' (labels: " << html_escape(labels) << ")</p>"
          << "<input type=\"text\" name=\"" << html_escape(field) << "\" value=\"" << html_escape(current) << "\">\n";
      break;
    }
  }
  out << "</fieldset>\n";
  return out.str();
}

}  // namespace

std::string render_html(const RenderModel& m, const std::string& task_name, const std::vector<std::string>& errors) {
  std::ostringstream body;
  body << "<h1>" << html_escape(task_name) << "</h1>\n";
  body << "<p>Progress: " << m.progress.completed << " of " << m.progress.total << " (" << m.progress.remaining
       << " remaining)";
  if (!m.codebook_url.empty() && m.instructions.kind == Instructions::Kind::url) {
    body << " <a href=\"" << html_escape(m.codebook_url) << "\">codebook</a>";
  }
  body << "</p>\n";
  if (m.instructions.kind == Instructions::Kind::html) {
    body << "<details id=\"instructions\"><summary>Instructions</summary>" << m.instructions.content << "</details>\n";
  }
  if (!m.notice.empty()) body << "<p role=\"status\">" << html_escape(m.notice) << "</p>\n";
  if (!errors.empty()) {
    body << "<ul role=\"alert\">";
    for (const auto& e : errors) body << "<li>" << html_escape(e) << "</li>";
    body << "</ul>\n";
  }
  if (m.step == StepKind::done || m.step == StepKind::blocked) {
    if (m.step == StepKind::done) body << "<p>All items are complete. Thank you.</p>\n";
    if (!m.message.empty()) {
      body << "<p>" << (m.step == StepKind::done ? "Completion code: " : "") << html_escape(m.message) << "</p>\n";
    }
  } else {
    if (!m.title.empty()) body << "<h2>" << html_escape(m.title) << "</h2>\n";
    for (std::size_t i = 0; i < m.documents.size(); ++i) {
      const auto& d = m.documents[i];
      if (m.documents.size() > 1) body << "<h3>" << html_escape(d.key) << "</h3>\n";
      if (d.kind == DocumentKind::image_ref) {
        body << "<img src=\"" << html_escape(d.payload) << "\" alt=\"" << html_escape(d.key) << "\">\n";
      } else {
        body << "<p class=\"document\">" << marked_text(d.payload, i, m.highlights) << "</p>\n";
      }
    }
    body << "<form method=\"post\" action=\"/submit\">\n"
         << "<input type=\"hidden\" name=\"item_key\" value=\"" << html_escape(m.item_key) << "\">\n"
         << "<input type=\"hidden\" name=\"revision\" value=\"" << m.revision << "\">\n"
         << "<input type=\"hidden\" name=\"elapsed_ms\" value=\"0\">\n";
    for (const auto& w : m.widgets) body << widget_html(w, m.stored);
    body << "<button type=\"submit\">Submit</button>\n</form>\n";
  }
  if (m.can_back || m.can_forward) {
    body << "<form method=\"post\" action=\"/navigate\">";
    if (m.can_back) body << "<button name=\"direction\" value=\"back\">Back</button>";
    if (m.can_forward) body << "<button name=\"direction\" value=\"forward\">Forward</button>";
    body << "</form>\n";
  }
  return page(task_name, body.str());
}

std::string login_page_html(const TaskConfig& config, const std::string& error) {
  std::ostringstream body;
  body << "<h1>" << html_escape(config.task_name) << "</h1>\n";
  if (!error.empty()) body << "<p role=\"alert\">" << html_escape(error) << "</p>\n";
  if (config.login_mode != LoginMode::url_argument) {
    body << "<form method=\"post\" action=\"/login\"><h2>Log in</h2>\n"
         << "<label>Email <input type=\"email\" name=\"email\" autocomplete=\"username\"></label><br>\n"
         << "<label>Password <input type=\"password\" name=\"password\" autocomplete=\"current-password\"></label><br>\n"
         << "<button type=\"submit\">Log in</button></form>\n"
         << "<form method=\"post\" action=\"/signup\"><h2>Create an account</h2>\n"
         << "<label>Email <input type=\"email\" name=\"email\"></label><br>\n"
         << "<label>Password <input type=\"password\" name=\"password\" autocomplete=\"new-password\"></label><br>\n"
         << "<button type=\"submit\">Sign up</button></form>\n";
  }
  if (config.login_mode != LoginMode::email_signup) {
    body << "<p>Crowdsourcing workers: open this page with <code>?id=YOUR_ID</code>.</p>\n";
  }
  return page(config.task_name, body.str());
}

json labels_from_form(const std::multimap<std::string, std::string>& fields,
                      const std::vector<AnnotationScheme>& schemes) {
  json labels = json::object();
  auto values = [&](const std::string& name) {
    std::vector<std::string> out;
    const auto [b, e] = fields.equal_range(name);
    for (auto it = b; it != e; ++it) out.push_back(it->second);
    return out;
  };
  for (const auto& s : schemes) {
    const std::string field = "label." + s.name;
    if (s.kind == SchemeKind::multiselect) {
      const auto v = values(field);
      // an unchecked group sends nothing; a present-but-empty list is a value
      if (!v.empty()) labels[s.name] = v;
      continue;
    }
    if (s.kind == SchemeKind::best_worst) {
      const auto best = values(field + ".best");
      const auto worst = values(field + ".worst");
      if (!best.empty() || !worst.empty()) {
        json bw = json::object();
        if (!best.empty()) bw["best"] = best.front();
        if (!worst.empty()) bw["worst"] = worst.front();
        labels[s.name] = bw;
      }
      continue;
    }
    const auto v = values(field);
    if (v.empty() || v.front().empty()) continue;
    if (s.kind != SchemeKind::span) {
      labels[s.name] = v.front();
      continue;
    }
    json spans = json::array();
    std::stringstream ss(v.front());
    std::string entry;
    bool malformed = false;
    while (std::getline(ss, entry, ';')) {
      const auto b = entry.find_first_not_of(' ');
      if (b == std::string::npos) continue;
      entry = entry.substr(b);
      std::vector<std::string> parts;
      std::stringstream es(entry);
      std::string part;
      for (int i = 0; i < 3 && std::getline(es, part, ':'); ++i) parts.push_back(part);
      std::string label;
      std::getline(es, label);
      try {
        if (parts.size() != 3 || label.empty()) throw std::invalid_argument("span");
        spans.push_back({{"doc", std::stoull(parts[0])},
                         {"start", std::stoull(parts[1])},
                         {"end", std::stoull(parts[2])},
                         {"label", label}});
      } catch (const std::exception&) {
        malformed = true;
      }
    }
    // leave malformed input as text so decoding reports it
    labels[s.name] = malformed ? json(v.front()) : spans;
  }
  return labels;
}

}  // namespace annoserve
