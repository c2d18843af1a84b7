#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace annoserve {

/// Decoded UTF-8 text. Offsets everywhere in the service are code-point
/// offsets into `code_points`, never byte offsets.
struct DecodedText {
  std::vector<char32_t> code_points;
  // byte_offsets[i] is the byte position of code point i; the final entry is
  // the total byte length, so byte_offsets.size() == code_points.size() + 1.
  std::vector<std::size_t> byte_offsets;
};

/// Decodes strict UTF-8. Returns std::nullopt on overlong encodings,
/// surrogates, truncated sequences or stray continuation bytes; `bad_byte`
/// receives the offending byte offset.
std::optional<DecodedText> decode_utf8(std::string_view bytes, std::size_t* bad_byte = nullptr);

bool is_valid_utf8(std::string_view bytes);

/// Number of code points; the input must be valid UTF-8.
std::size_t code_point_length(std::string_view utf8);

/// Substring by code-point range [start, end).
std::string code_point_substr(std::string_view utf8, std::size_t start, std::size_t end);

void append_utf8(std::string& out, char32_t cp);

struct Token {
  std::string text;  // lowercased
  std::size_t start = 0;  // code-point offsets, half open
  std::size_t end = 0;
  bool operator==(const Token&) const = default;
};

/// Single tokenizer shared by highlighting and feature extraction: tokens are
/// maximal runs of word characters, lowercased. Word characters are ASCII
/// letters and digits plus non-ASCII letters outside the common punctuation
/// and symbol blocks.
std::vector<Token> tokenize(std::string_view utf8);

bool is_word_char(char32_t cp);
char32_t fold_case(char32_t cp);

/// 64-bit FNV-1a; stable across platforms and runs, used to derive seeds.
std::uint64_t stable_hash(std::string_view bytes, std::uint64_t basis = 14695981039346656037ULL);
std::uint64_t derive_seed(std::uint64_t base, std::string_view a, std::string_view b = {});

}  // namespace annoserve
