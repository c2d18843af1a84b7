#include "annoserve/quality.hpp"

#include "annoserve/random.hpp"

namespace annoserve {

std::string_view to_string(PrestudyStatus v) {
  switch (v) {
    case PrestudyStatus::not_required: return "not_required";
    case PrestudyStatus::pending: return "pending";
    case PrestudyStatus::passed: return "passed";
    case PrestudyStatus::failed: return "failed";
  }
  return "not_required";
}

std::string_view to_string(QualityState v) {
  switch (v) {
    case QualityState::active: return "active";
    case QualityState::flagged: return "flagged";
    case QualityState::blocked: return "blocked";
  }
  return "active";
}

std::optional<PrestudyStatus> parse_prestudy_status(std::string_view s) {
  for (auto v : {PrestudyStatus::not_required, PrestudyStatus::pending, PrestudyStatus::passed, PrestudyStatus::failed}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::optional<QualityState> parse_quality_state(std::string_view s) {
  for (auto v : {QualityState::active, QualityState::flagged, QualityState::blocked}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

Instance gold_instance(const GoldItem& item, const TaskConfig& config) {
  auto record = item.fields;
  record[config.id_field] = item.id;
  const RecordLayout layout{config.id_field, config.text_fields, config.text_field_is_list, config.image_fields};
  std::string err;
  auto inst = instance_from_record(record, layout, &err);
  if (!inst) throw std::runtime_error("gold item '" + item.id + "': " + err);
  return *inst;
}

Labels gold_answers(const GoldItem& item, const TaskConfig& config) {
  Labels out;
  for (auto it = item.answers.begin(); it != item.answers.end(); ++it) {
    const auto* scheme = config.find_scheme(it.key());
    if (!scheme) continue;
    if (auto v = decode_label(*scheme, *it, nullptr)) out.emplace(it.key(), std::move(*v));
  }
  return out;
}

PrestudyResult score_prestudy(const PrestudyConfig& prestudy, const std::vector<bool>& correct) {
  PrestudyResult r;
  r.total = correct.size();
  for (const bool c : correct) r.correct += c ? 1 : 0;
  r.score = r.total == 0 ? 0.0 : static_cast<double>(r.correct) / static_cast<double>(r.total);
  // 3/4 against 0.75 must pass; compare in integers where possible
  r.passed = static_cast<double>(r.correct) >= prestudy.pass_threshold * static_cast<double>(r.total) - 1e-9;
  return r;
}

std::vector<QueueEntry> insert_attention_tests(std::vector<QueueEntry> queue, const AttentionConfig& attention,
                                               std::uint64_t seed) {
  if (attention.items.empty() || queue.empty()) return queue;
  const std::size_t count = round_count(attention.insertion_rate, queue.size());
  if (count == 0) return queue;
  const std::size_t total = queue.size() + count;
  Rng rng(seed);
  auto positions = sample_indices(rng, total, count);
  std::vector<bool> gold_slot(total, false);
  for (const auto p : positions) gold_slot[p] = true;

  std::vector<QueueEntry> out;
  out.reserve(total);
  std::size_t next_real = 0;
  std::size_t next_gold = 0;
  for (std::size_t slot = 0; slot < total; ++slot) {
    if (gold_slot[slot]) {
      out.push_back({QueueEntry::Kind::attention, attention.items[next_gold % attention.items.size()].id});
      ++next_gold;
    } else {
      out.push_back(std::move(queue[next_real++]));
    }
  }
  return out;
}

bool score_attention(QualityStatus& status, const AttentionConfig& attention, const Labels& expected,
                     const Labels& submitted) {
  const bool matched = labels_match(expected, submitted);
  if (!matched) {
    ++status.attention_failures;
    if (status.attention_failures >= attention.fail_threshold && status.state != QualityState::blocked) {
      status.state = attention.on_fail == OnFail::block ? QualityState::blocked : QualityState::flagged;
    }
  }
  return matched;
}

}  // namespace annoserve
