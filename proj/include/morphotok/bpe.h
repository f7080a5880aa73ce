#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace morphotok {

// Pre-token surface -> frequency. Pre-tokens never contain whitespace.
using PreTokenCounts = std::map<std::string, std::uint64_t>;

using BpeMerge = std::pair<std::string, std::string>;

struct BpeLearnResult {
  // Distinct code points, sorted by byte order.
  std::vector<std::string> alphabet;
  // Merges in the order they were learned.
  std::vector<BpeMerge> merges;
  // Alphabet followed by every new merged string, without repeats.
  std::vector<std::string> symbols;
};

// Greedy BPE over `counts`: start from code points, repeatedly merge the most
// frequent adjacent pair (ties go to the lexicographically smallest
// (left, right)) until `target_symbols` distinct symbols exist.
// Throws if the alphabet already exceeds the target or no pair is left.
BpeLearnResult LearnBpe(const PreTokenCounts& counts, std::size_t target_symbols);

// Merge list indexed for replay. Immutable after construction.
class BpeMergeTable {
 public:
  BpeMergeTable() = default;
  explicit BpeMergeTable(std::vector<BpeMerge> merges);

  const std::vector<BpeMerge>& merges() const { return merges_; }

  // Replays merges in training order on one pre-token, starting from its
  // code points. The result concatenates back to `pretoken`.
  std::vector<std::string> Apply(std::string_view pretoken) const;

 private:
  std::vector<BpeMerge> merges_;
  std::unordered_map<std::string, std::vector<std::size_t>> ranks_;
};

// One-off convenience over BpeMergeTable.
std::vector<std::string> ApplyBpe(std::string_view pretoken,
                                  const std::vector<BpeMerge>& merges);

}  // namespace morphotok
