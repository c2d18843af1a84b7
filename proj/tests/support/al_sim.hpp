#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "annoserve/learning/classifier.hpp"

namespace annoserve::testing {

/// Seeded binary corpus for the labelling-efficiency simulation.
struct Corpus {
  std::vector<learning::FeatureVector> x;
  std::vector<bool> positive;
};

/// 2,000 documents, exactly 10% positive.
Corpus synthetic_corpus(std::uint64_t seed);

/// F1 of the positive class over the whole corpus.
double f1_on(const learning::LogisticRegression& model, const Corpus& corpus);

/// Labels consumed, in batches of 20 after a random batch of 20, until a model
/// trained on them reaches F1 >= 0.8. Uncertainty mode takes each batch from
/// the front of the reordered queue (random_ratio 0); otherwise batches come
/// from a seeded permutation. Returns corpus size + 1 if never reached.
std::size_t labels_to_target(const Corpus& corpus, bool uncertainty, std::uint64_t seed,
                             std::ostream* trace = nullptr);

}  // namespace annoserve::testing
