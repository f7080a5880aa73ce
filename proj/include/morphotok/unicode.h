#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace morphotok {

enum class Normalization { kNone, kNfc };

Normalization ParseNormalization(std::string_view name);
std::string_view NormalizationName(Normalization n);

// Returns the byte offset of the first ill-formed UTF-8 sequence, or nullopt
// if `text` is well formed. Overlong forms and surrogates are ill formed.
std::optional<std::size_t> FindInvalidUtf8(std::string_view text);

// Splits valid UTF-8 into one view per code point. Views alias `text`.
std::vector<std::string_view> SplitCodePoints(std::string_view text);

std::u32string DecodeUtf8(std::string_view text);
std::string EncodeUtf8(std::u32string_view text);
void AppendUtf8(char32_t cp, std::string* out);

std::size_t CodePointLength(std::string_view text);

// Unicode White_Space property.
bool IsUnicodeWhitespace(char32_t cp);

// Splits on runs of Unicode whitespace; empty pieces are never returned.
std::vector<std::string_view> SplitWhitespace(std::string_view text);

bool IsBlank(std::string_view text);

std::string Normalize(std::string_view text, Normalization n);

// Code-point offsets at which extended grapheme clusters begin, plus the
// final offset (the code-point length). Always starts with 0.
std::vector<std::size_t> GraphemeBoundaries(std::string_view text);

}  // namespace morphotok
