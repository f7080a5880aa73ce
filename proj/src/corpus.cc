#include "morphotok/corpus.h"

#include <fstream>
#include <functional>
#include <random>
#include <string_view>
#include <unordered_set>

#include "fingerprint.h"
#include "morphotok/error.h"

namespace morphotok {
namespace {

using internal::Fingerprint;
using internal::FingerprintHash;
using internal::FingerprintOf;

class LineDeduper {
 public:
  explicit LineDeduper(Normalization normalization)
      : normalization_(normalization) {}

  // Returns true and fills `normalized` if `line` should be emitted.
  bool Accept(std::string_view line, std::string* normalized,
              DedupSummary* summary) {
    ++summary->lines_read;
    if (IsBlank(line)) {
      ++summary->blank_dropped;
      return false;
    }
    *normalized = Normalize(line, normalization_);
    if (!seen_.insert(FingerprintOf(*normalized)).second) {
      ++summary->duplicates_dropped;
      return false;
    }
    ++summary->lines_written;
    return true;
  }

 private:
  Normalization normalization_;
  std::unordered_set<Fingerprint, FingerprintHash> seen_;
};

std::ifstream OpenForRead(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

// Calls `fn(line)` for every line of `path`, validating UTF-8.
void ForEachLine(const std::filesystem::path& path,
                 const std::function<void(std::string_view)>& fn) {
  std::ifstream in = OpenForRead(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto bad = FindInvalidUtf8(line)) {
      throw ParseError(path.string(), lineno,
                       "invalid UTF-8 byte sequence at byte offset " +
                           std::to_string(*bad));
    }
    fn(line);
  }
}

// Knuth's selection sampling (Algorithm S): visits items in order and keeps
// each with probability (remaining needed) / (remaining items).
class SelectionSampler {
 public:
  SelectionSampler(std::size_t population, std::size_t n, std::uint64_t seed)
      : population_(population), needed_(n), rng_(seed) {
    if (n > population) {
      throw ContractError("cannot sample " + std::to_string(n) +
                          " lines from a corpus of " +
                          std::to_string(population) + " lines");
    }
  }

  bool Next() {
    const std::size_t remaining = population_ - visited_++;
    if (needed_ == 0) return false;
    // 53 high bits of the generator give a uniform double in [0, 1).
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    if (static_cast<double>(remaining) * u < static_cast<double>(needed_)) {
      --needed_;
      return true;
    }
    return false;
  }

 private:
  std::size_t population_;
  std::size_t needed_;
  std::size_t visited_ = 0;
  std::mt19937_64 rng_;
};

void AccumulateStats(std::string_view line, CorpusStats* stats,
                     std::unordered_set<std::string>* types) {
  ++stats->sentences;
  for (std::string_view w : SplitWhitespace(line)) {
    ++stats->word_tokens;
    types->emplace(w);
  }
}

CorpusStats Finish(CorpusStats stats, std::size_t types) {
  stats.word_types = types;
  if (stats.word_tokens > 0) {
    stats.type_token_ratio = static_cast<double>(stats.word_types) /
                             static_cast<double>(stats.word_tokens);
  }
  return stats;
}

}  // namespace

Corpus ReadCorpus(const std::filesystem::path& path) {
  Corpus corpus;
  ForEachLine(path, [&](std::string_view line) {
    corpus.lines.emplace_back(line);
  });
  return corpus;
}

void WriteCorpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  for (const std::string& line : corpus.lines) out << line << '\n';
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

DedupSummary DedupToStream(const std::vector<std::filesystem::path>& sources,
                           Normalization normalization, std::ostream& out) {
  LineDeduper dedup(normalization);
  DedupSummary summary;
  std::string normalized;
  for (const auto& src : sources) {
    ForEachLine(src, [&](std::string_view line) {
      if (dedup.Accept(line, &normalized, &summary)) out << normalized << '\n';
    });
  }
  return summary;
}

Corpus IngestDedup(const std::vector<std::filesystem::path>& sources,
                   Normalization normalization) {
  LineDeduper dedup(normalization);
  DedupSummary summary;
  Corpus result;
  std::string normalized;
  for (const auto& src : sources) {
    ForEachLine(src, [&](std::string_view line) {
      if (dedup.Accept(line, &normalized, &summary)) {
        result.lines.push_back(normalized);
      }
    });
  }
  return result;
}

Corpus IngestDedup(const std::vector<Corpus>& sources,
                   Normalization normalization) {
  LineDeduper dedup(normalization);
  DedupSummary summary;
  Corpus result;
  std::string normalized;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    for (std::size_t i = 0; i < sources[s].lines.size(); ++i) {
      const std::string& line = sources[s].lines[i];
      if (auto bad = FindInvalidUtf8(line)) {
        throw ParseError("source[" + std::to_string(s) + "]", i + 1,
                         "invalid UTF-8 byte sequence at byte offset " +
                             std::to_string(*bad));
      }
      if (dedup.Accept(line, &normalized, &summary)) {
        result.lines.push_back(normalized);
      }
    }
  }
  return result;
}

Corpus Sample(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
  SelectionSampler sampler(corpus.line_count(), n, seed);
  Corpus out;
  out.lines.reserve(n);
  for (const std::string& line : corpus.lines) {
    if (sampler.Next()) out.lines.push_back(line);
  }
  return out;
}

std::size_t SampleToStream(const std::filesystem::path& source, std::size_t n,
                           std::uint64_t seed, std::ostream& out) {
  std::size_t population = 0;
  ForEachLine(source, [&](std::string_view) { ++population; });
  SelectionSampler sampler(population, n, seed);
  std::size_t written = 0;
  ForEachLine(source, [&](std::string_view line) {
    if (sampler.Next()) {
      out << line << '\n';
      ++written;
    }
  });
  return written;
}

CorpusStats ComputeCorpusStats(const Corpus& corpus) {
  CorpusStats stats;
  std::unordered_set<std::string> types;
  for (const std::string& line : corpus.lines) {
    AccumulateStats(line, &stats, &types);
  }
  return Finish(stats, types.size());
}

CorpusStats ComputeCorpusStats(const std::filesystem::path& path) {
  CorpusStats stats;
  std::unordered_set<std::string> types;
  ForEachLine(path, [&](std::string_view line) {
    AccumulateStats(line, &stats, &types);
  });
  return Finish(stats, types.size());
}

}  // namespace morphotok
