#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "morphotok/unicode.h"

namespace morphotok {

// One sentence per line, UTF-8, no embedded newlines.
struct Corpus {
  std::vector<std::string> lines;

  std::size_t line_count() const { return lines.size(); }
  bool operator==(const Corpus&) const = default;
};

struct CorpusStats {
  std::size_t sentences = 0;
  std::size_t word_tokens = 0;
  std::size_t word_types = 0;
  // Absent when the corpus has no word tokens.
  std::optional<double> type_token_ratio;
};

struct DedupSummary {
  std::size_t lines_read = 0;
  std::size_t lines_written = 0;
  std::size_t blank_dropped = 0;
  std::size_t duplicates_dropped = 0;
};

// Reads a corpus file. Invalid UTF-8 raises ParseError with the line number.
Corpus ReadCorpus(const std::filesystem::path& path);
void WriteCorpus(const Corpus& corpus, const std::filesystem::path& path);

// Streams `sources` in priority order and writes each distinct normalized,
// non-blank line once, in first-occurrence order. Memory grows with the
// number of distinct lines (one 128-bit fingerprint each), not file size.
DedupSummary DedupToStream(const std::vector<std::filesystem::path>& sources,
                           Normalization normalization, std::ostream& out);

Corpus IngestDedup(const std::vector<std::filesystem::path>& sources,
                   Normalization normalization = Normalization::kNfc);

// In-memory variant; `sources` are treated exactly like files.
Corpus IngestDedup(const std::vector<Corpus>& sources,
                   Normalization normalization = Normalization::kNfc);

// Uniform sample of `n` lines without replacement, in input order.
// Deterministic for a fixed seed on every platform.
Corpus Sample(const Corpus& corpus, std::size_t n, std::uint64_t seed);

// Two-pass file variant of Sample; returns the number of lines written.
std::size_t SampleToStream(const std::filesystem::path& source, std::size_t n,
                           std::uint64_t seed, std::ostream& out);

CorpusStats ComputeCorpusStats(const Corpus& corpus);
CorpusStats ComputeCorpusStats(const std::filesystem::path& path);

}  // namespace morphotok
