#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "annoserve/config.hpp"
#include "annoserve/instance.hpp"

namespace annoserve {

enum class HighlightSource { keyword, decoy };

struct HighlightSpan {
  std::size_t document_index = 0;
  std::size_t start = 0;  // code-point offsets
  std::size_t end = 0;
  HighlightSource source = HighlightSource::keyword;
  // Matching keyword group. Decoys borrow a seeded group name so they paint
  // identically; the source field is what tells them apart.
  std::string group;
  bool operator==(const HighlightSpan&) const = default;
};

/// Case-insensitive whole-token matching. `x*` matches any token starting
/// with x. One span per (matching token, group); output ordered by
/// (start, group order).
std::vector<HighlightSpan> match_keywords(std::string_view text, const std::vector<KeywordGroup>& groups,
                                          std::size_t document_index = 0);

/// Returns keyword spans plus round(decoy_rate * candidates) decoys drawn
/// uniformly from tokens not overlapping any keyword span.
std::vector<HighlightSpan> add_decoys(std::string_view text, const std::vector<HighlightSpan>& keyword_spans,
                                      double decoy_rate, std::uint64_t seed,
                                      const std::vector<KeywordGroup>& groups = {}, std::size_t document_index = 0);

/// All highlights for an instance's text documents; the seed derives from
/// (user, instance) so re-renders are stable per annotator.
std::vector<HighlightSpan> highlight_instance(const Instance& instance, const HighlightConfig& config,
                                              std::string_view user_id);

std::string_view to_string(HighlightSource source);

}  // namespace annoserve
