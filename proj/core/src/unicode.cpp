#include "emojichat/unicode.hpp"

namespace emojichat::unicode {

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
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

bool is_emoji_component(char32_t cp) {
  return cp == 0x200D                        // zero width joiner
         || cp == 0xFE0E || cp == 0xFE0F     // variation selectors
         || cp == 0x20E3                     // combining keycap
         || (cp >= 0x1F3FB && cp <= 0x1F3FF) // skin tones
         || (cp >= 0xE0020 && cp <= 0xE007F);
}

bool is_emoji_codepoint(char32_t cp) {
  if (is_emoji_component(cp)) return true;
  return (cp >= 0x1F000 && cp <= 0x1FAFF)    // pictographs, emoticons, transport, flags
         || (cp >= 0x2600 && cp <= 0x27BF)   // misc symbols, dingbats
         || (cp >= 0x2300 && cp <= 0x23FF)   // misc technical (watch, hourglass)
         || (cp >= 0x2B00 && cp <= 0x2BFF)   // stars, squares
         || cp == 0x203C || cp == 0x2049 || cp == 0x2122 || cp == 0x2139
         || cp == 0x3030 || cp == 0x303D || cp == 0x3297 || cp == 0x3299;
}

bool is_emoji_grapheme(std::string_view s) {
  const auto cps = decode_utf8(s);
  if (cps.empty()) return false;
  bool has_base = false;
  for (char32_t cp : cps) {
    if (!is_emoji_codepoint(cp)) return false;
    if (!is_emoji_component(cp)) has_base = true;
  }
  return has_base;
}

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

}  // namespace emojichat::unicode
