#include "annoserve/highlight.hpp"

#include <algorithm>

#include "annoserve/random.hpp"
#include "annoserve/text.hpp"

namespace annoserve {

namespace {

struct CompiledPattern {
  std::string stem;  // lowercased
  bool prefix = false;
};

std::string lower(std::string_view s) {
  std::string out;
  if (const auto decoded = decode_utf8(s)) {
    for (const char32_t cp : decoded->code_points) append_utf8(out, fold_case(cp));
  }
  return out;
}

std::vector<std::vector<CompiledPattern>> compile(const std::vector<KeywordGroup>& groups) {
  std::vector<std::vector<CompiledPattern>> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    std::vector<CompiledPattern> patterns;
    for (std::string_view p : g.patterns) {
      CompiledPattern c;
      if (!p.empty() && p.back() == '*') {
        c.prefix = true;
        p.remove_suffix(1);
      }
      c.stem = lower(p);
      if (!c.stem.empty()) patterns.push_back(std::move(c));
    }
    out.push_back(std::move(patterns));
  }
  return out;
}

bool matches(const CompiledPattern& p, const std::string& token) {
  if (p.prefix) return token.compare(0, p.stem.size(), p.stem) == 0;
  return token == p.stem;
}

}  // namespace

std::string_view to_string(HighlightSource source) {
  return source == HighlightSource::keyword ? "keyword" : "decoy";
}

std::vector<HighlightSpan> match_keywords(std::string_view text, const std::vector<KeywordGroup>& groups,
                                          std::size_t document_index) {
  std::vector<HighlightSpan> out;
  if (groups.empty()) return out;
  const auto compiled = compile(groups);
  for (const auto& tok : tokenize(text)) {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const bool hit = std::any_of(compiled[g].begin(), compiled[g].end(),
                                   [&](const CompiledPattern& p) { return matches(p, tok.text); });
      if (hit) out.push_back({document_index, tok.start, tok.end, HighlightSource::keyword, groups[g].name});
    }
  }
  return out;
}

std::vector<HighlightSpan> add_decoys(std::string_view text, const std::vector<HighlightSpan>& keyword_spans,
                                      double decoy_rate, std::uint64_t seed, const std::vector<KeywordGroup>& groups,
                                      std::size_t document_index) {
  std::vector<HighlightSpan> out = keyword_spans;
  if (decoy_rate <= 0.0) return out;
  std::vector<Token> candidates;
  for (auto& tok : tokenize(text)) {
    const bool covered = std::any_of(keyword_spans.begin(), keyword_spans.end(), [&](const HighlightSpan& s) {
      return s.document_index == document_index && s.start < tok.end && tok.start < s.end;
    });
    if (!covered) candidates.push_back(std::move(tok));
  }
  const std::size_t count = round_count(decoy_rate, candidates.size());
  Rng rng(seed);
  auto chosen = sample_indices(rng, candidates.size(), count);
  std::sort(chosen.begin(), chosen.end());
  for (const auto i : chosen) {
    std::string group;
    if (!groups.empty()) group = groups[uniform_index(rng, groups.size())].name;
    out.push_back({document_index, candidates[i].start, candidates[i].end, HighlightSource::decoy, std::move(group)});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const HighlightSpan& a, const HighlightSpan& b) { return a.start < b.start; });
  return out;
}

std::vector<HighlightSpan> highlight_instance(const Instance& instance, const HighlightConfig& config,
                                              std::string_view user_id) {
  std::vector<HighlightSpan> out;
  for (std::size_t d = 0; d < instance.documents.size(); ++d) {
    const auto& doc = instance.documents[d];
    if (doc.kind != DocumentKind::text) continue;
    auto spans = match_keywords(doc.payload, config.keyword_groups, d);
    const auto seed = derive_seed(d, user_id, instance.id);
    auto with_decoys = add_decoys(doc.payload, spans, config.decoy_rate, seed, config.keyword_groups, d);
    out.insert(out.end(), with_decoys.begin(), with_decoys.end());
  }
  return out;
}

}  // namespace annoserve
