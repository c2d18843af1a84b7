#include "annoserve/scheme.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "annoserve/text.hpp"

namespace annoserve {

namespace {

constexpr std::pair<SchemeKind, std::string_view> kKindNames[] = {
    {SchemeKind::multiselect, "multiselect"}, {SchemeKind::radio, "radio"},
    {SchemeKind::best_worst, "best_worst"},   {SchemeKind::likert, "likert"},
    {SchemeKind::free_text, "free_text"},     {SchemeKind::span, "span"},
    {SchemeKind::number, "number"},           {SchemeKind::dropdown, "dropdown"}};

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; });
}

}  // namespace

std::string_view to_string(SchemeKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<SchemeKind> parse_scheme_kind(std::string_view text) {
  for (const auto& [k, name] : kKindNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

std::vector<std::string> AnnotationScheme::span_labels() const {
  std::vector<std::string> out;
  if (kind != SchemeKind::span) return out;
  out.reserve(options.size());
  for (const auto& o : options) out.push_back(o.value);
  return out;
}

bool AnnotationScheme::has_option(std::string_view value) const {
  return std::any_of(options.begin(), options.end(), [&](const Option& o) { return o.value == value; });
}

std::vector<std::string> best_worst_slots(const AnnotationScheme& scheme, const Instance& instance) {
  if (instance.documents.size() > 1) return instance.keys;
  std::vector<std::string> out;
  for (const auto& o : scheme.options) out.push_back(o.value);
  return out;
}

std::vector<std::string> check_value(const AnnotationScheme& scheme, const LabelData& value,
                                     const Instance* instance) {
  std::vector<std::string> errors;
  auto wrong_shape = [&] {
    errors.push_back("value does not match scheme kind " + std::string(to_string(scheme.kind)));
  };
  switch (scheme.kind) {
    case SchemeKind::multiselect: {
      const auto* v = std::get_if<ChoiceSet>(&value);
      if (!v) {
        wrong_shape();
        break;
      }
      for (const auto& choice : v->values) {
        if (!scheme.has_option(choice)) errors.push_back("unknown option '" + choice + "'");
      }
      break;
    }
    case SchemeKind::radio:
    case SchemeKind::dropdown: {
      const auto* v = std::get_if<Choice>(&value);
      if (!v) {
        wrong_shape();
        break;
      }
      if (!scheme.has_option(v->value)) errors.push_back("unknown option '" + v->value + "'");
      break;
    }
    case SchemeKind::best_worst: {
      const auto* v = std::get_if<BestWorst>(&value);
      if (!v) {
        wrong_shape();
        break;
      }
      if (v->best == v->worst) {
        errors.push_back("best and worst must differ");
        break;
      }
      std::vector<std::string> slots;
      if (instance) {
        slots = best_worst_slots(scheme, *instance);
      } else {
        for (const auto& o : scheme.options) slots.push_back(o.value);
      }
      for (const auto* pick : {&v->best, &v->worst}) {
        if (std::find(slots.begin(), slots.end(), *pick) == slots.end()) {
          errors.push_back("unknown best-worst candidate '" + *pick + "'");
        }
      }
      break;
    }
    case SchemeKind::likert: {
      const auto* v = std::get_if<LikertValue>(&value);
      if (!v) {
        wrong_shape();
        break;
      }
      if (v->value < 1 || v->value > scheme.likert_size) {
        errors.push_back("likert value " + std::to_string(v->value) + " outside [1, " +
                         std::to_string(scheme.likert_size) + "]");
      }
      break;
    }
    case SchemeKind::free_text: {
      const auto* v = std::get_if<FreeText>(&value);
      if (!v) {
        wrong_shape();
        break;
      }
      if (!is_valid_utf8(v->text)) errors.push_back("text is not valid UTF-8");
      else if (scheme.required && blank(v->text)) errors.push_back("text must not be empty");
      break;
    }
    case SchemeKind::number: {
      const auto* v = std::get_if<NumberValue>(&value);
      if (!v) {
        wrong_shape();
        break;
      }
      if (!std::isfinite(v->value)) errors.push_back("number must be finite");
      break;
    }
    case SchemeKind::span: {
      const auto* v = std::get_if<SpanList>(&value);
      if (!v) {
        wrong_shape();
        break;
      }
      std::set<SpanLabel> seen;
      for (const auto& s : v->spans) {
        if (!scheme.has_option(s.label)) errors.push_back("unknown span label '" + s.label + "'");
        if (s.start >= s.end) {
          errors.push_back("start must precede end");
          continue;
        }
        if (instance) {
          if (s.document_index >= instance->documents.size()) {
            errors.push_back("span document index " + std::to_string(s.document_index) + " out of range");
            continue;
          }
          const std::size_t len = instance->document_length(s.document_index);
          if (s.end > len) {
            errors.push_back("span [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                             ") exceeds document length " + std::to_string(len));
          }
        }
        if (!seen.insert(s).second) {
          errors.push_back("duplicate span [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                           ") with label '" + s.label + "'");
        }
      }
      break;
    }
  }
  return errors;
}

SubmissionCheck validate_submission(const std::vector<AnnotationScheme>& schemes,
                                    const std::vector<LabelValue>& submitted, const Instance& instance) {
  SubmissionCheck check;
  std::map<std::string, const LabelValue*> by_scheme;
  std::vector<FieldError> trailing;
  for (const auto& lv : submitted) {
    const bool known = std::any_of(schemes.begin(), schemes.end(),
                                   [&](const AnnotationScheme& s) { return s.name == lv.scheme; });
    if (!known) {
      trailing.push_back({lv.scheme, "unknown scheme"});
      continue;
    }
    if (!by_scheme.emplace(lv.scheme, &lv).second) {
      trailing.push_back({lv.scheme, "scheme submitted more than once"});
    }
  }
  for (const auto& scheme : schemes) {
    const auto it = by_scheme.find(scheme.name);
    if (it == by_scheme.end()) {
      if (scheme.required) check.errors.push_back({scheme.name, "a value is required"});
      continue;
    }
    const auto problems = check_value(scheme, it->second->value, &instance);
    for (const auto& p : problems) check.errors.push_back({scheme.name, p});
    if (problems.empty()) check.labels.emplace(scheme.name, it->second->value);
  }
  check.errors.insert(check.errors.end(), trailing.begin(), trailing.end());
  if (!check.ok()) check.labels.clear();
  return check;
}

std::optional<LabelData> decode_label(const AnnotationScheme& scheme, const nlohmann::json& value,
                                      std::string* error) {
  auto fail = [&](std::string msg) -> std::optional<LabelData> {
    if (error) *error = std::move(msg);
    return std::nullopt;
  };
  switch (scheme.kind) {
    case SchemeKind::multiselect: {
      ChoiceSet set;
      if (value.is_array()) {
        for (const auto& v : value) {
          if (!v.is_string()) return fail("multiselect values must be strings");
          set.values.push_back(v.get<std::string>());
        }
      } else {
        return fail("multiselect expects a list of option values");
      }
      std::sort(set.values.begin(), set.values.end());
      set.values.erase(std::unique(set.values.begin(), set.values.end()), set.values.end());
      return set;
    }
    case SchemeKind::radio:
    case SchemeKind::dropdown:
      if (!value.is_string()) return fail("expects a single option value");
      return Choice{value.get<std::string>()};
    case SchemeKind::best_worst: {
      if (!value.is_object() || !value.contains("best") || !value.contains("worst")) {
        return fail("best_worst expects {\"best\": ..., \"worst\": ...}");
      }
      auto as_text = [](const nlohmann::json& j) -> std::optional<std::string> {
        if (j.is_string()) return j.get<std::string>();
        if (j.is_number_integer()) return std::to_string(j.get<std::int64_t>());
        return std::nullopt;
      };
      const auto best = as_text(value["best"]);
      const auto worst = as_text(value["worst"]);
      if (!best || !worst) return fail("best and worst must be strings");
      return BestWorst{*best, *worst};
    }
    case SchemeKind::likert: {
      if (value.is_number_integer()) return LikertValue{value.get<std::int64_t>()};
      if (value.is_number_float()) {
        const double d = value.get<double>();
        if (std::floor(d) == d) return LikertValue{static_cast<std::int64_t>(d)};
        return fail("likert value must be an integer");
      }
      if (value.is_string()) {
        if (const auto v = parse_int(value.get<std::string>())) return LikertValue{*v};
      }
      return fail("likert value must be an integer");
    }
    case SchemeKind::free_text:
      if (!value.is_string()) return fail("free text must be a string");
      return FreeText{value.get<std::string>()};
    case SchemeKind::number: {
      if (value.is_number()) return NumberValue{value.get<double>()};
      if (value.is_string()) {
        if (const auto v = parse_double(value.get<std::string>())) return NumberValue{*v};
      }
      return fail("value is not numeric");
    }
    case SchemeKind::span: {
      if (!value.is_array()) return fail("span expects a list of spans");
      SpanList list;
      for (const auto& s : value) {
        if (!s.is_object()) return fail("span entries must be objects");
        auto non_negative = [&](const char* key, std::size_t& out) {
          if (!s.contains(key)) return std::string(key) == "doc";  // doc defaults to 0
          const auto& j = s[key];
          if (!j.is_number_integer() || j.get<std::int64_t>() < 0) return false;
          out = static_cast<std::size_t>(j.get<std::int64_t>());
          return true;
        };
        SpanLabel span;
        if (!non_negative("doc", span.document_index) || !non_negative("start", span.start) ||
            !non_negative("end", span.end)) {
          return fail("span offsets must be non-negative integers");
        }
        if (!s.contains("label") || !s["label"].is_string()) return fail("span label must be a string");
        span.label = s["label"].get<std::string>();
        list.spans.push_back(std::move(span));
      }
      return list;
    }
  }
  return fail("unsupported scheme kind");
}

nlohmann::json encode_label(const LabelData& value) {
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ChoiceSet>) {
          return v.values;
        } else if constexpr (std::is_same_v<T, Choice>) {
          return v.value;
        } else if constexpr (std::is_same_v<T, BestWorst>) {
          return {{"best", v.best}, {"worst", v.worst}};
        } else if constexpr (std::is_same_v<T, LikertValue>) {
          return v.value;
        } else if constexpr (std::is_same_v<T, FreeText>) {
          return v.text;
        } else if constexpr (std::is_same_v<T, NumberValue>) {
          return v.value;
        } else {
          nlohmann::json arr = nlohmann::json::array();
          for (const auto& s : v.spans) {
            arr.push_back({{"doc", s.document_index}, {"start", s.start}, {"end", s.end}, {"label", s.label}});
          }
          return arr;
        }
      },
      value);
}

std::vector<LabelValue> decode_labels(const std::vector<AnnotationScheme>& schemes,
                                      const nlohmann::json& object, std::vector<FieldError>& errors) {
  std::vector<LabelValue> out;
  if (!object.is_object()) {
    errors.push_back({"", "labels must be an object keyed by scheme name"});
    return out;
  }
  for (const auto& scheme : schemes) {
    const auto it = object.find(scheme.name);
    if (it == object.end() || it->is_null()) continue;
    std::string err;
    if (auto v = decode_label(scheme, *it, &err)) {
      out.push_back({scheme.name, std::move(*v)});
    } else {
      errors.push_back({scheme.name, err});
    }
  }
  for (auto it = object.begin(); it != object.end(); ++it) {
    const bool known = std::any_of(schemes.begin(), schemes.end(),
                                   [&](const AnnotationScheme& s) { return s.name == it.key(); });
    if (!known) errors.push_back({it.key(), "unknown scheme"});
  }
  return out;
}

SubmissionCheck check_submission(const std::vector<AnnotationScheme>& schemes, const nlohmann::json& object,
                                 const Instance& instance) {
  std::vector<FieldError> decode_errors;
  const auto decoded = decode_labels(schemes, object, decode_errors);
  auto check = validate_submission(schemes, decoded, instance);
  if (decode_errors.empty()) return check;
  std::vector<FieldError> merged;
  for (const auto& scheme : schemes) {
    bool undecodable = false;
    for (const auto& e : decode_errors) {
      if (e.scheme == scheme.name) {
        merged.push_back(e);
        undecodable = true;
      }
    }
    for (const auto& e : check.errors) {
      if (e.scheme == scheme.name && !undecodable) merged.push_back(e);
    }
  }
  auto known = [&](const std::string& name) {
    return std::any_of(schemes.begin(), schemes.end(), [&](const AnnotationScheme& s) { return s.name == name; });
  };
  for (const auto& e : decode_errors) {
    if (!known(e.scheme)) merged.push_back(e);
  }
  check.errors = std::move(merged);
  check.labels.clear();
  return check;
}

nlohmann::json encode_labels(const Labels& labels) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [name, value] : labels) out[name] = encode_label(value);
  return out;
}

bool labels_match(const Labels& expected, const Labels& actual) {
  for (const auto& [name, value] : expected) {
    const auto it = actual.find(name);
    if (it == actual.end() || !(it->second == value)) return false;
  }
  return true;
}

}  // namespace annoserve
