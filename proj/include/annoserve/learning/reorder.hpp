#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "annoserve/config.hpp"
#include "annoserve/learning/classifier.hpp"

namespace annoserve::learning {

enum class SlotProvenance { uncertain, random };

struct QueuePlan {
  std::vector<std::string> ids;
  std::vector<SlotProvenance> provenance;
  std::vector<double> confidence;  // model confidence of the item in each slot

  std::size_t random_slots() const;
};

struct Candidate {
  std::string id;
  FeatureVector features;
};

/// Orders items for labeling. round(random_ratio * n) slots, spread evenly at
/// positions floor((j + 0.5) * n / r), receive items drawn uniformly (seeded)
/// from the pool; the remaining items fill the other slots in ascending
/// confidence, ties by input order.
QueuePlan plan_queue(const std::vector<std::string>& ids, const std::vector<double>& confidences,
                     double random_ratio, std::uint64_t seed);

QueuePlan reorder(const std::vector<Candidate>& unlabeled, const Classifier& classifier, double random_ratio,
                  std::uint64_t seed, ConfidenceMeasure measure = ConfidenceMeasure::least_confidence);

}  // namespace annoserve::learning
