#include "annoserve/wizard.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "annoserve/text.hpp"

namespace annoserve {

std::optional<std::string> ScriptedPrompts::ask(const std::string& prompt) {
  prompts_.push_back(prompt);
  if (next_ >= answers_.size()) return std::nullopt;
  return answers_[next_++];
}

std::optional<std::string> StreamPrompts::ask(const std::string& prompt) {
  out_ << prompt << ": " << std::flush;
  std::string line;
  if (!std::getline(in_, line)) return std::nullopt;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

void StreamPrompts::tell(const std::string& message) { out_ << message << "\n"; }

std::vector<std::string> read_answer_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw WizardError("cannot read answer file " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '#') continue;
    out.push_back(line);
  }
  return out;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

// Parser returns an error message, or empty on success.
using Parse = std::function<std::string(const std::string&)>;

class Asker {
 public:
  explicit Asker(PromptStream& p) : p_(p) {}

  std::string ask(const std::string& prompt, const std::optional<std::string>& fallback, const Parse& parse) {
    const std::string shown = fallback && !fallback->empty() ? prompt + " [" + *fallback + "]" : prompt;
    for (;;) {
      auto answer = p_.ask(shown);
      ++count_;
      if (!answer) throw WizardError("answers ended at prompt " + std::to_string(count_) + " ('" + prompt + "')");
      auto value = trim(*answer);
      if (value.empty() && fallback) value = *fallback;
      std::string err = parse(value);
      if (err.empty() && value.empty() && !fallback) err = "an answer is required";
      if (err.empty()) return value;
      if (!p_.interactive()) {
        throw WizardError("answer " + std::to_string(count_) + " to '" + prompt + "': " + err);
      }
      p_.tell("  " + err);
    }
  }

  std::string text(const std::string& prompt, std::optional<std::string> fallback = std::nullopt) {
    return ask(prompt, fallback, [](const std::string&) { return std::string(); });
  }

  std::vector<std::string> list(const std::string& prompt, bool allow_empty) {
    const auto v = ask(prompt, allow_empty ? std::optional<std::string>("") : std::nullopt,
                       [&](const std::string& s) {
                         if (!allow_empty && split_list(s).empty()) return std::string("at least one entry is required");
                         return std::string();
                       });
    return split_list(v);
  }

  long long integer(const std::string& prompt, std::optional<long long> fallback, long long min, long long max) {
    const auto v = ask(prompt, fallback ? std::optional<std::string>(std::to_string(*fallback)) : std::nullopt,
                       [&](const std::string& s) {
                         long long x = 0;
                         const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
                         if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::string("expected a whole number");
                         if (x < min || x > max) {
                           return "expected a number between " + std::to_string(min) + " and " + std::to_string(max);
                         }
                         return std::string();
                       });
    return std::stoll(v);
  }

  std::uint64_t u64(const std::string& prompt, std::uint64_t fallback) {
    const auto v = ask(prompt, std::to_string(fallback), [](const std::string& s) {
      std::uint64_t x = 0;
      const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::string("expected a non-negative whole number");
      return std::string();
    });
    std::uint64_t x = 0;
    std::from_chars(v.data(), v.data() + v.size(), x);
    return x;
  }

  double real(const std::string& prompt, double fallback, double min, double max, bool max_inclusive) {
    std::ostringstream def;
    def << fallback;
    const auto v = ask(prompt, def.str(), [&](const std::string& s) {
      double x = 0;
      const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::string("expected a number");
      if (x < min || x > max || (x == max && !max_inclusive)) return std::string("number out of range");
      return std::string();
    });
    double x = 0;
    std::from_chars(v.data(), v.data() + v.size(), x);
    return x;
  }

  bool yes_no(const std::string& prompt, bool fallback) {
    const auto v = ask(prompt + " (y/n)", std::string(fallback ? "y" : "n"), [](const std::string& s) {
      return s == "y" || s == "n" || s == "yes" || s == "no" ? std::string() : std::string("answer y or n");
    });
    return v == "y" || v == "yes";
  }

  template <typename E, std::size_t N>
  E choice(const std::string& prompt, const E (&values)[N], E fallback) {
    std::string names;
    for (const auto v : values) names += (names.empty() ? "" : ", ") + std::string(to_string(v));
    const auto answer = ask(prompt + " (" + names + ")", std::string(to_string(fallback)), [&](const std::string& s) {
      for (const auto v : values) {
        if (to_string(v) == s) return std::string();
      }
      return "expected one of: " + names;
    });
    for (const auto v : values) {
      if (to_string(v) == answer) return v;
    }
    return fallback;
  }

 private:
  PromptStream& p_;
  std::size_t count_ = 0;
};

bool has_options(SchemeKind k) {
  return k == SchemeKind::radio || k == SchemeKind::multiselect || k == SchemeKind::dropdown ||
         k == SchemeKind::best_worst || k == SchemeKind::span;
}

AnnotationScheme ask_scheme(Asker& a, std::size_t index, const std::vector<AnnotationScheme>& earlier,
                            std::vector<std::string>& used_keys) {
  const auto label = "Scheme " + std::to_string(index + 1);
  AnnotationScheme s;
  s.name = a.ask(label + " name", std::nullopt, [&](const std::string& v) {
    for (const auto& e : earlier) {
      if (e.name == v) return std::string("scheme names must be unique");
    }
    return std::string();
  });
  s.kind = a.choice(label + " kind", kAllSchemeKinds, SchemeKind::radio);
  s.description = a.text(label + " description", "");
  if (has_options(s.kind)) {
    const auto values = a.list(label + (s.kind == SchemeKind::span ? " span labels" : " options") + " (comma-separated)",
                               false);
    for (const auto& v : values) s.options.push_back({v, v, false, std::nullopt, std::nullopt});
    if (a.yes_no(label + ": add keybindings and tooltips", false)) {
      for (auto& o : s.options) {
        const auto key = a.ask("Key for '" + o.value + "' (one character, blank for none)", "", [&](const std::string& v) {
          if (v.empty()) return std::string();
          if (code_point_length(v) != 1) return std::string("a key is a single character");
          for (const auto& k : used_keys) {
            if (k == v) return "key '" + v + "' is already used";
          }
          return std::string();
        });
        if (!key.empty()) {
          o.key = key;
          used_keys.push_back(key);
        }
        const auto tip = a.text("Tooltip for '" + o.value + "' (blank for none)", "");
        if (!tip.empty()) o.tooltip = tip;
      }
    }
  }
  if (s.kind == SchemeKind::likert) {
    s.likert_size = static_cast<int>(a.integer(label + " scale size", 5, 2, 100));
    s.min_label = a.text(label + " label for the low end", "");
    s.max_label = a.text(label + " label for the high end", "");
  }
  s.required = a.yes_no(label + " required", true);
  return s;
}

}  // namespace

WizardResult run_config_wizard(PromptStream& prompts, const std::filesystem::path& base_dir) {
  Asker a(prompts);
  TaskConfig c;
  c.base_dir = base_dir;
  c.task_name = a.text("Task name");
  c.data_files = a.list("Data files (comma-separated; .csv, .tsv or .jsonl)", false);
  c.id_field = a.text("ID field", "id");
  c.text_fields = a.list("Text field(s) (comma-separated; several make a document set)", false);
  c.text_field_is_list = c.text_fields.size() > 1;
  c.image_fields = a.list("Image fields among them (comma-separated, blank for none)", true);

  const auto n = a.integer("Number of annotation schemes", 1, 1, 64);
  std::vector<std::string> used_keys;
  for (long long i = 0; i < n; ++i) c.schemes.push_back(ask_scheme(a, static_cast<std::size_t>(i), c.schemes, used_keys));

  const auto instr = a.ask("Instructions (none, url, html)", std::string("none"), [](const std::string& v) {
    return v == "none" || v == "url" || v == "html" ? std::string() : std::string("expected none, url or html");
  });
  if (instr == "url") c.instructions = {Instructions::Kind::url, a.text("Instructions URL")};
  if (instr == "html") c.instructions = {Instructions::Kind::html, a.text("Instructions HTML")};

  static constexpr LoginMode kModes[] = {LoginMode::email_signup, LoginMode::url_argument, LoginMode::both};
  c.login_mode = a.choice("Login mode", kModes, LoginMode::email_signup);

  c.assignment.annotations_per_instance =
      static_cast<int>(a.integer("Annotations per instance (0 = every annotator sees everything)", 0, 0, 1000000));
  const auto max = a.integer("Max instances per annotator (0 = no limit)", 0, 0, 100000000);
  if (max > 0) c.assignment.max_instances_per_annotator = static_cast<int>(max);
  static constexpr Ordering kOrderings[] = {Ordering::original, Ordering::random, Ordering::active_learning};
  c.assignment.ordering = a.choice("Ordering", kOrderings, Ordering::original);
  c.assignment.seed = a.u64("Assignment seed", 0);

  if (a.yes_no("Highlight keywords", false)) {
    HighlightConfig h;
    const auto groups = a.integer("Number of keyword groups", 1, 1, 1000);
    for (long long g = 0; g < groups; ++g) {
      KeywordGroup kg;
      const auto label = "Keyword group " + std::to_string(g + 1);
      kg.name = a.text(label + " name");
      kg.patterns = split_list(a.ask(label + " patterns (comma-separated, trailing * for prefixes)", std::nullopt,
                                     [](const std::string& v) {
                                       const auto items = split_list(v);
                                       if (items.empty()) return std::string("at least one pattern is required");
                                       for (const auto& p : items) {
                                         if (!is_valid_keyword_pattern(p)) return "invalid pattern '" + p + "'";
                                       }
                                       return std::string();
                                     }));
      h.keyword_groups.push_back(std::move(kg));
    }
    h.decoy_rate = a.real("Decoy highlight rate", 0.0, 0.0, 1.0, false);
    c.highlight = std::move(h);
  }

  if (c.assignment.ordering == Ordering::active_learning) {
    ActiveLearningConfig al;
    al.target_scheme = a.ask("Active learning target scheme", c.schemes.front().name, [&](const std::string& v) {
      const auto* s = c.find_scheme(v);
      if (!s) return std::string("no scheme named '" + v + "'");
      if (s->kind != SchemeKind::radio && s->kind != SchemeKind::multiselect) {
        return std::string("the target must be a radio or multiselect scheme");
      }
      return std::string();
    });
    al.retrain_every = static_cast<int>(a.integer("Retrain every N annotations", 20, 1, 1000000));
    al.random_ratio = a.real("Random sample ratio", 0.0, 0.0, 1.0, true);
    al.min_labels_to_start = static_cast<int>(a.integer("Minimum labels before training", 10, 1, 1000000));
    static constexpr ConfidenceMeasure kMeasures[] = {ConfidenceMeasure::least_confidence, ConfidenceMeasure::margin,
                                                      ConfidenceMeasure::entropy};
    al.confidence = a.choice("Confidence measure", kMeasures, ConfidenceMeasure::least_confidence);
    al.seed = a.u64("Active learning seed", 0);
    c.active_learning = al;
  }

  c.server.port = static_cast<int>(a.integer("Server port", 8000, 1, 65535));
  c.server.output_dir = a.text("Output directory", "annotation_output");
  c.server.admin_user = a.text("Admin user", "admin");
  c.server.admin_password = a.text("Admin password (blank disables admin endpoints)", "");
  c.server.completion_code = a.text("Completion code shown at the end (blank for none)", "");

  const auto issues = validate_config(c, false);
  if (!issues.empty()) {
    std::string msg = "the answers describe an invalid config:";
    for (const auto& i : issues) msg += "\n  " + format_issue(i);
    throw WizardError(msg);
  }
  return {c, serialize_config(c)};
}

}  // namespace annoserve
