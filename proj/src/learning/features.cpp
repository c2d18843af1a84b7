#include "annoserve/learning/features.hpp"

#include <algorithm>
#include <set>

#include "annoserve/text.hpp"

namespace annoserve::learning {

FeatureVector featurize(std::string_view text) {
  FeatureVector v;
  const auto tokens = tokenize(text);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    ++v.counts[tokens[i].text];
    if (i + 1 < tokens.size()) ++v.counts[tokens[i].text + "_" + tokens[i + 1].text];
  }
  return v;
}

Vocabulary Vocabulary::build(const std::vector<FeatureVector>& vectors) {
  std::set<std::string> terms;
  for (const auto& v : vectors) {
    for (const auto& [term, count] : v.counts) terms.insert(term);
  }
  return from_terms(std::vector<std::string>(terms.begin(), terms.end()));
}

Vocabulary Vocabulary::from_terms(std::vector<std::string> sorted_terms) {
  Vocabulary vocab;
  vocab.terms_ = std::move(sorted_terms);
  vocab.index_.reserve(vocab.terms_.size());
  for (std::size_t i = 0; i < vocab.terms_.size(); ++i) {
    vocab.index_.emplace(vocab.terms_[i], static_cast<std::uint32_t>(i));
  }
  return vocab;
}

SparseRow Vocabulary::encode(const FeatureVector& v) const {
  std::vector<std::pair<std::uint32_t, double>> entries;
  entries.reserve(v.counts.size());
  for (const auto& [term, count] : v.counts) {
    const auto it = index_.find(term);
    if (it != index_.end()) entries.emplace_back(it->second, static_cast<double>(count));
  }
  std::sort(entries.begin(), entries.end());
  SparseRow row;
  row.indices.reserve(entries.size());
  row.values.reserve(entries.size());
  for (const auto& [i, x] : entries) {
    row.indices.push_back(i);
    row.values.push_back(x);
  }
  return row;
}

}  // namespace annoserve::learning
