#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "annoserve/config.hpp"
#include "annoserve/instance.hpp"

namespace annoserve {

enum class PrestudyStatus { not_required, pending, passed, failed };
enum class QualityState { active, flagged, blocked };

std::string_view to_string(PrestudyStatus v);
std::string_view to_string(QualityState v);
std::optional<PrestudyStatus> parse_prestudy_status(std::string_view s);
std::optional<QualityState> parse_quality_state(std::string_view s);

struct QualityStatus {
  PrestudyStatus prestudy = PrestudyStatus::not_required;
  int attention_failures = 0;
  QualityState state = QualityState::active;
  bool operator==(const QualityStatus&) const = default;
};

/// One slot of an annotator's queue: a real instance or an attention item.
struct QueueEntry {
  enum class Kind { instance, attention };
  Kind kind = Kind::instance;
  std::string id;
  bool operator==(const QueueEntry&) const = default;
};

/// Instance built from a gold item's fields; the gold id is the instance id.
Instance gold_instance(const GoldItem& item, const TaskConfig& config);

/// Decoded gold answers. Load-time validation guarantees these decode.
Labels gold_answers(const GoldItem& item, const TaskConfig& config);

struct PrestudyResult {
  std::size_t correct = 0;
  std::size_t total = 0;
  double score = 0.0;
  bool passed = false;
};

/// score = correct / total, pass iff score >= pass_threshold.
PrestudyResult score_prestudy(const PrestudyConfig& prestudy, const std::vector<bool>& correct);

/// Inserts round(insertion_rate * |queue|) attention items, cycled from the
/// configured items, at uniformly random positions of the extended queue.
std::vector<QueueEntry> insert_attention_tests(std::vector<QueueEntry> queue, const AttentionConfig& attention,
                                               std::uint64_t seed);

/// Applies one attention answer: a mismatch counts a failure and, once
/// failures reach fail_threshold, flags or blocks per on_fail. Returns
/// whether the answer matched.
bool score_attention(QualityStatus& status, const AttentionConfig& attention, const Labels& expected,
                     const Labels& submitted);

}  // namespace annoserve
