#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace claimrank {

// Decodes the UTF-8 sequence starting at `i`, advancing `i` past it. An
// invalid or truncated sequence is consumed one byte at a time and yields
// that byte's value, so malformed input degrades to Latin-1 instead of
// derailing tokenization.
inline std::uint32_t decode_utf8(std::string_view s, std::size_t& i) {
  const unsigned char b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  std::uint32_t cp = 0;
  if ((b0 & 0xe0) == 0xc0) {
    len = 2;
    cp = b0 & 0x1f;
  } else if ((b0 & 0xf0) == 0xe0) {
    len = 3;
    cp = b0 & 0x0f;
  } else if ((b0 & 0xf8) == 0xf0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return b0;
  }
  if (i + static_cast<std::size_t>(len) > s.size()) {
    ++i;
    return b0;
  }
  for (int k = 1; k < len; ++k) {
    const unsigned char bk = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
    if ((bk & 0xc0) != 0x80) {
      ++i;
      return b0;
    }
    cp = (cp << 6) | (bk & 0x3f);
  }
  i += static_cast<std::size_t>(len);
  return cp;
}

inline std::size_t codepoint_count(std::string_view s) {
  std::size_t i = 0, n = 0;
  while (i < s.size()) {
    decode_utf8(s, i);
    ++n;
  }
  return n;
}

inline bool is_space_cp(std::uint32_t cp) {
  switch (cp) {
    case 0x09:
    case 0x0a:
    case 0x0b:
    case 0x0c:
    case 0x0d:
    case 0x20:
    case 0x85:
    case 0xa0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202f:
    case 0x205f:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200a;
  }
}

// Fixed punctuation table: ASCII punctuation plus the general-punctuation
// block and the common Latin-1 / Arabic / CJK / fullwidth marks that occur in
// tweet corpora. Letters and digits of any script never land here.
inline bool is_punct_cp(std::uint32_t cp) {
  if ((cp >= 0x21 && cp <= 0x2f) || (cp >= 0x3a && cp <= 0x40) ||
      (cp >= 0x5b && cp <= 0x60) || (cp >= 0x7b && cp <= 0x7e)) {
    return true;
  }
  switch (cp) {
    case 0xa1:   // inverted exclamation
    case 0xa7:   // section sign
    case 0xab:   // left guillemet
    case 0xb6:   // pilcrow
    case 0xb7:   // middle dot
    case 0xbb:   // right guillemet
    case 0xbf:   // inverted question mark
    case 0x60c:  // arabic comma
    case 0x61b:  // arabic semicolon
    case 0x61e:  // arabic triple dot
    case 0x61f:  // arabic question mark
    case 0x66a:  // arabic percent
    case 0x6d4:  // arabic full stop
      return true;
    default:
      break;
  }
  if (cp >= 0x2010 && cp <= 0x2027) return true;   // dashes, quotes, daggers
  if (cp >= 0x2030 && cp <= 0x205e) return true;   // permille .. punctuation
  if (cp >= 0x3001 && cp <= 0x303f) return true;   // CJK symbols
  if (cp >= 0xff01 && cp <= 0xff0f) return true;   // fullwidth forms
  if (cp >= 0xff1a && cp <= 0xff20) return true;
  if (cp >= 0xff3b && cp <= 0xff40) return true;
  if (cp >= 0xff5b && cp <= 0xff65) return true;
  return false;
}

inline bool is_digit_cp(std::uint32_t cp) { return cp >= '0' && cp <= '9'; }

// Byte span into the original text. Tokens carry spans so augmentation can
// splice replacements in place and keep every untouched byte verbatim.
struct TokenSpan {
  std::size_t offset = 0;
  std::size_t length = 0;

  std::string_view view(std::string_view text) const { return text.substr(offset, length); }
};

// Splits on Unicode whitespace only; punctuation stays attached.
inline std::vector<TokenSpan> whitespace_spans(std::string_view text) {
  std::vector<TokenSpan> out;
  std::size_t i = 0;
  std::size_t start = 0;
  bool in_token = false;
  while (i < text.size()) {
    const std::size_t at = i;
    const std::uint32_t cp = decode_utf8(text, i);
    if (is_space_cp(cp)) {
      if (in_token) {
        out.push_back({start, at - start});
        in_token = false;
      }
    } else if (!in_token) {
      start = at;
      in_token = true;
    }
  }
  if (in_token) out.push_back({start, text.size() - start});
  return out;
}

// Pre-tokenizer shared by the subword tokenizer and the augmenter: split on
// Unicode whitespace, then make every punctuation codepoint its own token.
inline std::vector<TokenSpan> pretokenize_spans(std::string_view text) {
  std::vector<TokenSpan> out;
  std::size_t i = 0;
  std::size_t start = 0;
  bool in_word = false;
  while (i < text.size()) {
    const std::size_t at = i;
    const std::uint32_t cp = decode_utf8(text, i);
    if (is_space_cp(cp)) {
      if (in_word) {
        out.push_back({start, at - start});
        in_word = false;
      }
    } else if (is_punct_cp(cp)) {
      if (in_word) {
        out.push_back({start, at - start});
        in_word = false;
      }
      out.push_back({at, i - at});
    } else if (!in_word) {
      start = at;
      in_word = true;
    }
  }
  if (in_word) out.push_back({start, text.size() - start});
  return out;
}

inline std::vector<std::string> pretokenize(std::string_view text) {
  std::vector<std::string> out;
  for (const TokenSpan& span : pretokenize_spans(text)) {
    out.emplace_back(span.view(text));
  }
  return out;
}

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

// Lowercases ASCII, Latin-1 letters, and the basic Cyrillic block; other
// scripts pass through unchanged. Fixed rule, not locale-dependent.
inline std::uint32_t fold_cp(std::uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0xc0 && cp <= 0xde && cp != 0xd7) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40f) return cp + 0x50;
  if (cp >= 0x410 && cp <= 0x42f) return cp + 0x20;
  return cp;
}

inline std::string fold_case(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    append_utf8(out, fold_cp(decode_utf8(text, i)));
  }
  return out;
}

inline bool has_word_char(std::string_view token) {
  std::size_t i = 0;
  while (i < token.size()) {
    const std::uint32_t cp = decode_utf8(token, i);
    if (!is_space_cp(cp) && !is_punct_cp(cp)) return true;
  }
  return false;
}

inline bool has_digit(std::string_view token) {
  std::size_t i = 0;
  while (i < token.size()) {
    if (is_digit_cp(decode_utf8(token, i))) return true;
  }
  return false;
}

inline std::string_view trim_whitespace(std::string_view text) {
  std::size_t begin = 0;
  std::size_t i = 0;
  std::size_t end = 0;
  bool seen = false;
  while (i < text.size()) {
    const std::size_t at = i;
    const std::uint32_t cp = decode_utf8(text, i);
    if (!is_space_cp(cp)) {
      if (!seen) {
        begin = at;
        seen = true;
      }
      end = i;
    }
  }
  if (!seen) return {};
  return text.substr(begin, end - begin);
}

// Word-counting rule for dataset statistics: lowercase, split on Unicode
// whitespace, strip leading/trailing punctuation; tokens that are pure
// punctuation are dropped.
inline std::vector<std::string> stat_words(std::string_view text) {
  std::vector<std::string> out;
  const std::string folded = fold_case(text);
  for (const TokenSpan& span : whitespace_spans(folded)) {
    std::string_view tok = span.view(folded);
    // strip leading punctuation
    std::size_t i = 0;
    std::size_t keep_begin = tok.size();
    std::size_t keep_end = 0;
    while (i < tok.size()) {
      const std::size_t at = i;
      const std::uint32_t cp = decode_utf8(tok, i);
      if (!is_punct_cp(cp)) {
        if (at < keep_begin) keep_begin = at;
        keep_end = i;
      }
    }
    if (keep_end > keep_begin) {
      out.emplace_back(tok.substr(keep_begin, keep_end - keep_begin));
    }
  }
  return out;
}

}  // namespace claimrank
