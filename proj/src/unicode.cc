#include "morphotok/unicode.h"

#include <memory>

#include <unicode/brkiter.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "morphotok/error.h"

namespace morphotok {
namespace {

// Length of the sequence starting at lead byte `c`, or 0 if `c` cannot start
// a sequence.
int SequenceLength(unsigned char c) {
  if (c < 0x80) return 1;
  if (c >= 0xC2 && c <= 0xDF) return 2;
  if (c >= 0xE0 && c <= 0xEF) return 3;
  if (c >= 0xF0 && c <= 0xF4) return 4;
  return 0;
}

bool IsContinuation(unsigned char c) { return (c & 0xC0) == 0x80; }

char32_t DecodeOne(std::string_view cp) {
  const auto* s = reinterpret_cast<const unsigned char*>(cp.data());
  switch (cp.size()) {
    case 1: return s[0];
    case 2: return ((s[0] & 0x1F) << 6) | (s[1] & 0x3F);
    case 3: return ((s[0] & 0x0F) << 12) | ((s[1] & 0x3F) << 6) | (s[2] & 0x3F);
    default:
      return ((s[0] & 0x07) << 18) | ((s[1] & 0x3F) << 12) |
             ((s[2] & 0x3F) << 6) | (s[3] & 0x3F);
  }
}

}  // namespace

Normalization ParseNormalization(std::string_view name) {
  if (name == "nfc" || name == "NFC") return Normalization::kNfc;
  if (name == "none") return Normalization::kNone;
  throw Error("unknown normalization '" + std::string(name) +
              "' (expected nfc or none)");
}

std::string_view NormalizationName(Normalization n) {
  return n == Normalization::kNfc ? "nfc" : "none";
}

std::optional<std::size_t> FindInvalidUtf8(std::string_view text) {
  const auto* s = reinterpret_cast<const unsigned char*>(text.data());
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    const int len = SequenceLength(s[i]);
    if (len == 0 || i + len > n) return i;
    for (int k = 1; k < len; ++k) {
      if (!IsContinuation(s[i + k])) return i;
    }
    if (len == 3) {
      // Reject overlong forms and UTF-16 surrogates.
      if (s[i] == 0xE0 && s[i + 1] < 0xA0) return i;
      if (s[i] == 0xED && s[i + 1] >= 0xA0) return i;
    } else if (len == 4) {
      if (s[i] == 0xF0 && s[i + 1] < 0x90) return i;
      if (s[i] == 0xF4 && s[i + 1] >= 0x90) return i;
    }
    i += len;
  }
  return std::nullopt;
}

std::vector<std::string_view> SplitCodePoints(std::string_view text) {
  std::vector<std::string_view> out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    int len = SequenceLength(static_cast<unsigned char>(text[i]));
    if (len == 0) len = 1;
    if (i + len > text.size()) len = static_cast<int>(text.size() - i);
    out.push_back(text.substr(i, len));
    i += len;
  }
  return out;
}

std::u32string DecodeUtf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (std::string_view cp : SplitCodePoints(text)) out.push_back(DecodeOne(cp));
  return out;
}

void AppendUtf8(char32_t cp, std::string* out) {
  if (cp < 0x80) {
    out->push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out->push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out->push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out->push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string EncodeUtf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) AppendUtf8(cp, &out);
  return out;
}

std::size_t CodePointLength(std::string_view text) {
  std::size_t n = 0;
  for (char c : text) {
    if (!IsContinuation(static_cast<unsigned char>(c))) ++n;
  }
  return n;
}

bool IsUnicodeWhitespace(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

std::vector<std::string_view> SplitWhitespace(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = std::string_view::npos;
  std::size_t pos = 0;
  for (std::string_view cp : SplitCodePoints(text)) {
    const char32_t v = DecodeOne(cp);
    if (IsUnicodeWhitespace(v)) {
      if (start != std::string_view::npos) {
        out.push_back(text.substr(start, pos - start));
        start = std::string_view::npos;
      }
    } else if (start == std::string_view::npos) {
      start = pos;
    }
    pos += cp.size();
  }
  if (start != std::string_view::npos) out.push_back(text.substr(start));
  return out;
}

bool IsBlank(std::string_view text) { return SplitWhitespace(text).empty(); }

std::string Normalize(std::string_view text, Normalization n) {
  if (n == Normalization::kNone) return std::string(text);
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  const icu::UnicodeString src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  if (nfc->isNormalized(src, status) && U_SUCCESS(status)) {
    return std::string(text);
  }
  status = U_ZERO_ERROR;
  icu::UnicodeString dst;
  nfc->normalize(src, dst, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  std::string out;
  dst.toUTF8String(out);
  return out;
}

std::vector<std::size_t> GraphemeBoundaries(std::string_view text) {
  const std::u32string cps = DecodeUtf8(text);
  // ICU reports UTF-16 offsets; map them back to code-point offsets.
  icu::UnicodeString u;
  std::vector<std::size_t> utf16_to_cp;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const int32_t before = u.length();
    u.append(static_cast<UChar32>(cps[i]));
    for (int32_t k = before; k < u.length(); ++k) utf16_to_cp.push_back(i);
  }
  utf16_to_cp.push_back(cps.size());

  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<icu::BreakIterator> it(
      icu::BreakIterator::createCharacterInstance(icu::Locale::getRoot(),
                                                  status));
  if (U_FAILURE(status)) throw Error("ICU grapheme iterator unavailable");
  it->setText(u);
  std::vector<std::size_t> out;
  for (int32_t p = it->first(); p != icu::BreakIterator::DONE; p = it->next()) {
    out.push_back(utf16_to_cp[p]);
  }
  if (out.empty() || out.back() != cps.size()) out.push_back(cps.size());
  return out;
}

}  // namespace morphotok
