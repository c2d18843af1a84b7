#include "annoserve/learning/reorder.hpp"

#include <algorithm>
#include <numeric>

#include "annoserve/random.hpp"

namespace annoserve::learning {

std::size_t QueuePlan::random_slots() const {
  return static_cast<std::size_t>(std::count(provenance.begin(), provenance.end(), SlotProvenance::random));
}

QueuePlan plan_queue(const std::vector<std::string>& ids, const std::vector<double>& confidences, double random_ratio,
                     std::uint64_t seed) {
  const std::size_t n = ids.size();
  const std::size_t r = std::min(n, round_count(random_ratio, n));
  Rng rng(seed);
  const auto drawn = sample_indices(rng, n, r);

  std::vector<bool> is_random(n, false);
  for (const auto i : drawn) is_random[i] = true;
  std::vector<std::size_t> rest;
  rest.reserve(n - r);
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_random[i]) rest.push_back(i);
  }
  std::stable_sort(rest.begin(), rest.end(),
                   [&](std::size_t a, std::size_t b) { return confidences[a] < confidences[b]; });

  std::vector<bool> random_slot(n, false);
  for (std::size_t j = 0; j < r; ++j) {
    random_slot[static_cast<std::size_t>((static_cast<double>(j) + 0.5) * static_cast<double>(n) /
                                         static_cast<double>(r))] = true;
  }

  QueuePlan plan;
  plan.ids.reserve(n);
  std::size_t next_random = 0;
  std::size_t next_rest = 0;
  for (std::size_t slot = 0; slot < n; ++slot) {
    const std::size_t item = random_slot[slot] ? drawn[next_random++] : rest[next_rest++];
    plan.ids.push_back(ids[item]);
    plan.provenance.push_back(random_slot[slot] ? SlotProvenance::random : SlotProvenance::uncertain);
    plan.confidence.push_back(confidences[item]);
  }
  return plan;
}

QueuePlan reorder(const std::vector<Candidate>& unlabeled, const Classifier& classifier, double random_ratio,
                  std::uint64_t seed, ConfidenceMeasure measure) {
  std::vector<std::string> ids;
  std::vector<FeatureVector> xs;
  ids.reserve(unlabeled.size());
  xs.reserve(unlabeled.size());
  for (const auto& c : unlabeled) {
    ids.push_back(c.id);
    xs.push_back(c.features);
  }
  return plan_queue(ids, classifier.confidence_batch(xs, measure), random_ratio, seed);
}

}  // namespace annoserve::learning
