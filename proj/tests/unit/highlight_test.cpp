#include <gtest/gtest.h>

#include <set>

#include "annoserve/highlight.hpp"
#include "annoserve/text.hpp"

using namespace annoserve;

namespace {

std::set<std::string> matched_tokens(const std::string& text, const std::vector<HighlightSpan>& spans) {
  std::set<std::string> out;
  for (const auto& s : spans) out.insert(code_point_substr(text, s.start, s.end));
  return out;
}

}  // namespace

TEST(Highlight, PrefixPattern) {
  const std::string text = "He retired early; retirement followed.";
  const auto spans = match_keywords(text, {{"retirement", {"retir*"}}});
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_EQ(matched_tokens(text, spans), (std::set<std::string>{"retired", "retirement"}));
  EXPECT_EQ(spans[0].group, "retirement");
  EXPECT_EQ(spans[0].source, HighlightSource::keyword);
}

TEST(Highlight, WholeTokenOnly) {
  EXPECT_TRUE(match_keywords("Playoff game", {{"layoffs", {"layoff"}}}).empty());
  EXPECT_EQ(match_keywords("LAYOFF notice", {{"layoffs", {"layoff"}}}).size(), 1u);
  EXPECT_TRUE(match_keywords("anything", {}).empty());
}

TEST(Highlight, OverlappingGroupsAllReported) {
  const auto spans = match_keywords("the layoffs came", {{"a", {"layoff*"}}, {"b", {"lay*", "layoffs"}}});
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_EQ(spans[0].group, "a");
  EXPECT_EQ(spans[1].group, "b");
  EXPECT_EQ(spans[0].start, spans[1].start);
}

TEST(Highlight, DecoyCountAndDisjointness) {
  // 50 tokens, none matching
  std::string text;
  for (int i = 0; i < 50; ++i) text += "w" + std::to_string(i) + " ";
  EXPECT_EQ(add_decoys(text, {}, 0.0, 1).size(), 0u);
  const auto spans = add_decoys(text, {}, 0.1, 99, {{"g", {"zzz"}}});
  ASSERT_EQ(spans.size(), 5u);
  for (const auto& s : spans) {
    EXPECT_EQ(s.source, HighlightSource::decoy);
    EXPECT_EQ(s.group, "g");
  }
  EXPECT_EQ(add_decoys(text, {}, 0.1, 99), add_decoys(text, {}, 0.1, 99));

  const std::string t2 = "retired people and retiring workers talk about retirement plans today";
  const auto kw = match_keywords(t2, {{"r", {"retir*"}}});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto all = add_decoys(t2, kw, 0.5, seed);
    ASSERT_EQ(all.size(), kw.size() + 4);  // round(0.5 * 7) candidates
    for (const auto& d : all) {
      if (d.source != HighlightSource::decoy) continue;
      for (const auto& k : kw) EXPECT_TRUE(d.end <= k.start || k.end <= d.start);
    }
  }
}

TEST(Highlight, StablePerUserAndInstance) {
  Instance inst;
  inst.id = "x";
  inst.keys = {"text"};
  inst.documents = {{DocumentKind::text, "one two three four five six seven eight nine ten"}};
  HighlightConfig cfg{{{"g", {"two"}}}, 0.3};
  EXPECT_EQ(highlight_instance(inst, cfg, "u1"), highlight_instance(inst, cfg, "u1"));
  bool differs = false;
  for (int u = 0; u < 20 && !differs; ++u) {
    differs = highlight_instance(inst, cfg, "u1") != highlight_instance(inst, cfg, "v" + std::to_string(u));
  }
  EXPECT_TRUE(differs);
}
