#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace annoserve::learning {

/// Unigram and adjacent-pair bigram counts keyed by feature string
/// ("cat", "the_cat"). Counts are always positive.
struct FeatureVector {
  std::map<std::string, int> counts;
  bool empty() const { return counts.empty(); }
  bool operator==(const FeatureVector&) const = default;
};

/// Tokens come from the shared tokenizer (lowercased maximal word runs).
FeatureVector featurize(std::string_view text);

/// Sparse row over a fixed vocabulary; indices strictly increasing.
struct SparseRow {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
};

/// Feature-string to column index, fixed for one training round. Indices are
/// assigned in lexicographic feature order.
class Vocabulary {
 public:
  Vocabulary() = default;
  static Vocabulary build(const std::vector<FeatureVector>& vectors);
  static Vocabulary from_terms(std::vector<std::string> sorted_terms);

  std::size_t size() const { return terms_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }
  /// Features outside the vocabulary are dropped.
  SparseRow encode(const FeatureVector& v) const;

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

}  // namespace annoserve::learning
