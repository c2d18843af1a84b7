#include "annoserve/text.hpp"

namespace annoserve {

std::optional<DecodedText> decode_utf8(std::string_view bytes, std::size_t* bad_byte) {
  DecodedText out;
  out.code_points.reserve(bytes.size());
  out.byte_offsets.reserve(bytes.size() + 1);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  std::size_t i = 0;
  auto fail = [&](std::size_t at) -> std::optional<DecodedText> {
    if (bad_byte) *bad_byte = at;
    return std::nullopt;
  };
  while (i < n) {
    const unsigned char lead = p[i];
    char32_t cp = 0;
    std::size_t len = 0;
    char32_t min_cp = 0;
    if (lead < 0x80) {
      cp = lead;
      len = 1;
    } else if ((lead & 0xE0) == 0xC0) {
      cp = lead & 0x1F;
      len = 2;
      min_cp = 0x80;
    } else if ((lead & 0xF0) == 0xE0) {
      cp = lead & 0x0F;
      len = 3;
      min_cp = 0x800;
    } else if ((lead & 0xF8) == 0xF0) {
      cp = lead & 0x07;
      len = 4;
      min_cp = 0x10000;
    } else {
      return fail(i);
    }
    if (i + len > n) return fail(i);
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char c = p[i + k];
      if ((c & 0xC0) != 0x80) return fail(i + k);
      cp = (cp << 6) | (c & 0x3F);
    }
    if (len > 1 && cp < min_cp) return fail(i);
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return fail(i);
    out.code_points.push_back(cp);
    out.byte_offsets.push_back(i);
    i += len;
  }
  out.byte_offsets.push_back(n);
  return out;
}

bool is_valid_utf8(std::string_view bytes) { return decode_utf8(bytes).has_value(); }

std::size_t code_point_length(std::string_view utf8) {
  std::size_t count = 0;
  for (const char c : utf8) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++count;
  }
  return count;
}

std::string code_point_substr(std::string_view utf8, std::size_t start, std::size_t end) {
  std::size_t cp = 0;
  std::size_t byte_start = utf8.size();
  std::size_t byte_end = utf8.size();
  for (std::size_t i = 0; i <= utf8.size(); ++i) {
    const bool boundary =
        i == utf8.size() || (static_cast<unsigned char>(utf8[i]) & 0xC0) != 0x80;
    if (!boundary) continue;
    if (cp == start) byte_start = i;
    if (cp == end) {
      byte_end = i;
      break;
    }
    ++cp;
  }
  if (byte_start >= byte_end) return {};
  return std::string(utf8.substr(byte_start, byte_end - byte_start));
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  }
  // Latin-1 punctuation and symbols, the multiplication and division signs.
  if (cp >= 0x80 && cp <= 0xBF) return false;
  if (cp == 0xD7 || cp == 0xF7) return false;
  // General punctuation, super/subscripts, currency, letterlike and arrows
  // through misc technical, box drawing and dingbats.
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;
  // CJK symbols and punctuation.
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  // Fullwidth ASCII punctuation.
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  if (cp >= 0xFF1A && cp <= 0xFF20) return false;
  // Emoji and pictographs.
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;
  if (cp == 0xFEFF) return false;
  return true;
}

char32_t fold_case(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  // Greek and Cyrillic capitals.
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

std::vector<Token> tokenize(std::string_view utf8) {
  std::vector<Token> tokens;
  const auto decoded = decode_utf8(utf8);
  if (!decoded) return tokens;
  const auto& cps = decoded->code_points;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!is_word_char(cps[i])) {
      ++i;
      continue;
    }
    Token tok;
    tok.start = i;
    while (i < cps.size() && is_word_char(cps[i])) {
      append_utf8(tok.text, fold_case(cps[i]));
      ++i;
    }
    tok.end = i;
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

std::uint64_t stable_hash(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view a, std::string_view b) {
  std::uint64_t h = stable_hash(a, 14695981039346656037ULL ^ base);
  h = stable_hash("\x1f", h);
  h = stable_hash(b, h);
  // splitmix64 finaliser so nearby inputs give unrelated seeds
  h += 0x9E3779B97F4A7C15ULL;
  h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ULL;
  h = (h ^ (h >> 27)) * 0x94D049BB133111EBULL;
  return h ^ (h >> 31);
}

}  // namespace annoserve
