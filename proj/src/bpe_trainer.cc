#include <algorithm>
#include <cstdint>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "morphotok/bpe.h"
#include "morphotok/error.h"
#include "morphotok/unicode.h"

namespace morphotok {
namespace {

using SymbolId = std::uint32_t;

std::uint64_t PairKey(SymbolId left, SymbolId right) {
  return (static_cast<std::uint64_t>(left) << 32) | right;
}
SymbolId LeftOf(std::uint64_t key) { return static_cast<SymbolId>(key >> 32); }
SymbolId RightOf(std::uint64_t key) { return static_cast<SymbolId>(key); }

struct Word {
  std::vector<SymbolId> symbols;
  std::int64_t count = 0;
};

class BpeState {
 public:
  explicit BpeState(const PreTokenCounts& counts) {
    std::set<std::string> alphabet;
    for (const auto& [text, count] : counts) {
      for (std::string_view cp : SplitCodePoints(text)) alphabet.emplace(cp);
    }
    for (const std::string& cp : alphabet) Intern(cp);
    alphabet_size_ = names_.size();

    words_.reserve(counts.size());
    for (const auto& [text, count] : counts) {
      if (count == 0) continue;
      Word w;
      w.count = static_cast<std::int64_t>(count);
      for (std::string_view cp : SplitCodePoints(text)) {
        w.symbols.push_back(ids_.at(std::string(cp)));
      }
      words_.push_back(std::move(w));
    }
    for (std::size_t i = 0; i < words_.size(); ++i) {
      AddPairs(i);
      for (std::uint64_t key : touched_) Push(key);
      touched_.clear();
    }
  }

  std::size_t alphabet_size() const { return alphabet_size_; }
  const std::vector<std::string>& names() const { return names_; }

  // Pops the best live pair; false when no pair has a positive count.
  bool PopBest(std::uint64_t* key) {
    while (!heap_.empty()) {
      const Entry top = heap_.top();
      heap_.pop();
      auto it = pair_counts_.find(top.key);
      if (it == pair_counts_.end() || it->second != top.count) continue;
      *key = top.key;
      return true;
    }
    return false;
  }

  // Applies the merge everywhere; returns the id of the merged symbol.
  SymbolId Merge(std::uint64_t key) {
    const SymbolId left = LeftOf(key);
    const SymbolId right = RightOf(key);
    const SymbolId merged = Intern(names_[left] + names_[right]);

    std::vector<std::size_t> targets = std::move(where_[key]);
    where_.erase(key);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

    for (std::size_t wi : targets) {
      Word& w = words_[wi];
      if (!Contains(w.symbols, left, right)) continue;
      RemovePairs(wi);
      std::vector<SymbolId> next;
      next.reserve(w.symbols.size());
      for (std::size_t i = 0; i < w.symbols.size();) {
        if (i + 1 < w.symbols.size() && w.symbols[i] == left &&
            w.symbols[i + 1] == right) {
          next.push_back(merged);
          i += 2;
        } else {
          next.push_back(w.symbols[i]);
          ++i;
        }
      }
      w.symbols = std::move(next);
      AddPairs(wi);
    }
    for (std::uint64_t k : touched_) Push(k);
    touched_.clear();
    return merged;
  }

 private:
  struct Entry {
    std::int64_t count;
    std::uint64_t key;
  };

  // Priority order: higher count first, then smaller (left, right) strings.
  struct EntryWorse {
    const std::vector<std::string>* names;
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.count != b.count) return a.count < b.count;
      const std::string& al = (*names)[LeftOf(a.key)];
      const std::string& bl = (*names)[LeftOf(b.key)];
      if (al != bl) return al > bl;
      return (*names)[RightOf(a.key)] > (*names)[RightOf(b.key)];
    }
  };

  SymbolId Intern(const std::string& name) {
    auto [it, inserted] =
        ids_.try_emplace(name, static_cast<SymbolId>(names_.size()));
    if (inserted) names_.push_back(name);
    return it->second;
  }

  static bool Contains(const std::vector<SymbolId>& s, SymbolId l, SymbolId r) {
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      if (s[i] == l && s[i + 1] == r) return true;
    }
    return false;
  }

  void AddPairs(std::size_t wi) {
    const Word& w = words_[wi];
    for (std::size_t i = 0; i + 1 < w.symbols.size(); ++i) {
      const std::uint64_t key = PairKey(w.symbols[i], w.symbols[i + 1]);
      pair_counts_[key] += w.count;
      where_[key].push_back(wi);
      touched_.insert(key);
    }
  }

  void RemovePairs(std::size_t wi) {
    const Word& w = words_[wi];
    for (std::size_t i = 0; i + 1 < w.symbols.size(); ++i) {
      const std::uint64_t key = PairKey(w.symbols[i], w.symbols[i + 1]);
      auto it = pair_counts_.find(key);
      it->second -= w.count;
      if (it->second == 0) pair_counts_.erase(it);
      touched_.insert(key);
    }
  }

  void Push(std::uint64_t key) {
    auto it = pair_counts_.find(key);
    if (it != pair_counts_.end() && it->second > 0) {
      heap_.push({it->second, key});
    }
  }

  std::vector<std::string> names_;
  std::unordered_map<std::string, SymbolId> ids_;
  std::size_t alphabet_size_ = 0;
  std::vector<Word> words_;
  std::unordered_map<std::uint64_t, std::int64_t> pair_counts_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> where_;
  std::unordered_set<std::uint64_t> touched_;
  std::priority_queue<Entry, std::vector<Entry>, EntryWorse> heap_{
      EntryWorse{&names_}};
};

}  // namespace

BpeLearnResult LearnBpe(const PreTokenCounts& counts,
                        std::size_t target_symbols) {
  BpeState state(counts);
  if (state.alphabet_size() > target_symbols) {
    throw ContractError("vocabulary of " + std::to_string(target_symbols) +
                        " symbols cannot hold the alphabet of " +
                        std::to_string(state.alphabet_size()) + " code points");
  }
  BpeLearnResult result;
  result.alphabet.assign(state.names().begin(),
                         state.names().begin() +
                             static_cast<std::ptrdiff_t>(state.alphabet_size()));
  result.symbols = result.alphabet;
  std::unordered_set<std::string> present(result.symbols.begin(),
                                          result.symbols.end());
  while (result.symbols.size() < target_symbols) {
    std::uint64_t key = 0;
    if (!state.PopBest(&key)) {
      throw ContractError(
          "corpus supports only " + std::to_string(result.symbols.size()) +
          " BPE symbols; requested " + std::to_string(target_symbols));
    }
    const std::string left = state.names()[LeftOf(key)];
    const std::string right = state.names()[RightOf(key)];
    const SymbolId merged = state.Merge(key);
    result.merges.emplace_back(left, right);
    const std::string& name = state.names()[merged];
    if (present.insert(name).second) result.symbols.push_back(name);
  }
  return result;
}

namespace {

std::string RankKey(std::string_view left, std::string_view right) {
  std::string key = std::to_string(left.size());
  key += ':';
  key += left;
  key += right;
  return key;
}

}  // namespace

BpeMergeTable::BpeMergeTable(std::vector<BpeMerge> merges)
    : merges_(std::move(merges)) {
  for (std::size_t r = 0; r < merges_.size(); ++r) {
    ranks_[RankKey(merges_[r].first, merges_[r].second)].push_back(r);
  }
}

std::vector<std::string> BpeMergeTable::Apply(std::string_view pretoken) const {
  std::vector<std::string> symbols;
  for (std::string_view cp : SplitCodePoints(pretoken)) symbols.emplace_back(cp);

  // The next merge applied is the earliest rank, at or after the last
  // applied one, whose pair occurs in the current symbols.
  std::size_t floor = 0;
  while (symbols.size() >= 2) {
    std::size_t best = merges_.size();
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = ranks_.find(RankKey(symbols[i], symbols[i + 1]));
      if (it == ranks_.end()) continue;
      auto r = std::lower_bound(it->second.begin(), it->second.end(), floor);
      if (r != it->second.end()) best = std::min(best, *r);
    }
    if (best == merges_.size()) break;
    const BpeMerge& m = merges_[best];
    std::vector<std::string> next;
    next.reserve(symbols.size());
    for (std::size_t i = 0; i < symbols.size();) {
      if (i + 1 < symbols.size() && symbols[i] == m.first &&
          symbols[i + 1] == m.second) {
        next.push_back(m.first + m.second);
        i += 2;
      } else {
        next.push_back(std::move(symbols[i]));
        ++i;
      }
    }
    symbols = std::move(next);
    floor = best + 1;
  }
  return symbols;
}

std::vector<std::string> ApplyBpe(std::string_view pretoken,
                                  const std::vector<BpeMerge>& merges) {
  return BpeMergeTable(merges).Apply(pretoken);
}

}  // namespace morphotok
