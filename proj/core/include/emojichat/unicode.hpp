#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace emojichat::unicode {

// Decodes UTF-8. Invalid bytes decode to U+FFFD one byte at a time.
std::vector<char32_t> decode_utf8(std::string_view s);
void append_utf8(std::string& out, char32_t cp);

// Pictographic code points plus the joiners and modifiers that build emoji
// sequences (ZWJ, variation selectors, skin tones, keycap, tags).
bool is_emoji_codepoint(char32_t cp);
bool is_emoji_component(char32_t cp);

// True when s is non-empty, consists only of emoji code points, and contains
// at least one pictographic base (not just joiners/modifiers).
bool is_emoji_grapheme(std::string_view s);

std::string_view trim(std::string_view s);

}  // namespace emojichat::unicode
