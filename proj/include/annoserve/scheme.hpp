#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "annoserve/instance.hpp"

namespace annoserve {

enum class SchemeKind { multiselect, radio, best_worst, likert, free_text, span, number, dropdown };

inline constexpr SchemeKind kAllSchemeKinds[] = {
    SchemeKind::multiselect, SchemeKind::radio,     SchemeKind::best_worst, SchemeKind::likert,
    SchemeKind::free_text,   SchemeKind::span,      SchemeKind::number,     SchemeKind::dropdown};

std::string_view to_string(SchemeKind kind);
std::optional<SchemeKind> parse_scheme_kind(std::string_view text);

struct Option {
  std::string value;
  std::string display;
  // display is a media URL/path rather than text
  bool display_is_media = false;
  std::optional<std::string> key;
  std::optional<std::string> tooltip;
  bool operator==(const Option&) const = default;
};

/// One labeled question. Span schemes use `options` as their span label set.
struct AnnotationScheme {
  std::string name;
  SchemeKind kind = SchemeKind::radio;
  std::string description;
  std::vector<Option> options;
  int likert_size = 0;
  std::string min_label;
  std::string max_label;
  bool required = true;

  std::vector<std::string> span_labels() const;
  bool has_option(std::string_view value) const;
  bool operator==(const AnnotationScheme&) const = default;
};

struct SpanLabel {
  std::size_t document_index = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;
  bool operator==(const SpanLabel&) const = default;
  auto operator<=>(const SpanLabel&) const = default;
};

struct ChoiceSet {
  std::vector<std::string> values;  // sorted, unique
  bool operator==(const ChoiceSet&) const = default;
};
struct Choice {
  std::string value;
  bool operator==(const Choice&) const = default;
};
struct BestWorst {
  std::string best;
  std::string worst;
  bool operator==(const BestWorst&) const = default;
};
struct LikertValue {
  std::int64_t value = 0;
  bool operator==(const LikertValue&) const = default;
};
struct FreeText {
  std::string text;
  bool operator==(const FreeText&) const = default;
};
struct NumberValue {
  double value = 0.0;
  bool operator==(const NumberValue&) const = default;
};
struct SpanList {
  std::vector<SpanLabel> spans;
  bool operator==(const SpanList&) const = default;
};

using LabelData = std::variant<ChoiceSet, Choice, BestWorst, LikertValue, FreeText, NumberValue, SpanList>;

struct LabelValue {
  std::string scheme;
  LabelData value;
  bool operator==(const LabelValue&) const = default;
};

/// Validated per-scheme values keyed by scheme name.
using Labels = std::map<std::string, LabelData>;

struct FieldError {
  std::string scheme;
  std::string message;
  bool operator==(const FieldError&) const = default;
};

struct SubmissionCheck {
  Labels labels;
  std::vector<FieldError> errors;
  bool ok() const { return errors.empty(); }
};

/// Selectable best-worst candidates for an instance: its documents when it
/// carries more than one, otherwise the scheme's options.
std::vector<std::string> best_worst_slots(const AnnotationScheme& scheme, const Instance& instance);

/// Checks scheme semantics. Errors are reported in scheme order, unknown
/// schemes last.
SubmissionCheck validate_submission(const std::vector<AnnotationScheme>& schemes,
                                    const std::vector<LabelValue>& submitted,
                                    const Instance& instance);

/// Shape check of a single value without the required/unknown-scheme rules.
std::vector<std::string> check_value(const AnnotationScheme& scheme, const LabelData& value,
                                     const Instance* instance);

/// JSON wire encoding:
///   multiselect  ["a", "b"]          radio/dropdown "a"
///   best_worst   {"best": "x", "worst": "y"}
///   likert       3                   free_text "..."     number 2.5
///   span         [{"doc": 0, "start": 4, "end": 9, "label": "L"}]
/// Decoding is lenient about numeric strings (HTML forms send text).
std::optional<LabelData> decode_label(const AnnotationScheme& scheme, const nlohmann::json& value,
                                      std::string* error);
nlohmann::json encode_label(const LabelData& value);

/// Decodes a {"scheme": value, ...} object. Undecodable values become errors
/// keyed by scheme; unknown scheme names are reported as errors.
std::vector<LabelValue> decode_labels(const std::vector<AnnotationScheme>& schemes,
                                      const nlohmann::json& object, std::vector<FieldError>& errors);
nlohmann::json encode_labels(const Labels& labels);

/// decode_labels followed by validate_submission. A scheme whose value could
/// not be decoded reports only the decode error.
SubmissionCheck check_submission(const std::vector<AnnotationScheme>& schemes, const nlohmann::json& object,
                                 const Instance& instance);

/// Exact equality after validation; multiselect compares as sets.
bool labels_match(const Labels& expected, const Labels& actual);

}  // namespace annoserve
