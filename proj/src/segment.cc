#include "morphotok/segment.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "morphotok/error.h"
#include "morphotok/unicode.h"
#include "rng.h"

namespace morphotok {
namespace {

constexpr int kMdlFormatVersion = 1;
constexpr char kMdlFormatName[] = "morphotok-mdl";

// Extra nats charged for a code point no morph covers.
constexpr double kUnknownPenalty = 10.0;

long double XLogX(long double x) { return x > 0 ? x * std::log(x) : 0.0L; }

// Incrementally maintained MdlCost. Symbol "" is the end-of-morph marker.
class CostState {
 public:
  explicit CostState(double corpus_weight) : corpus_weight_(corpus_weight) {}

  void Add(const std::string& morph, std::int64_t delta) {
    if (delta == 0) return;
    auto it = morphs_.try_emplace(morph, 0).first;
    const std::int64_t before = it->second;
    const std::int64_t after = before + delta;
    if (after < 0) throw Error("internal: negative morph count for " + morph);
    s1_ += XLogX(after) - XLogX(before);
    tokens_ += delta;
    it->second = after;
    if (before == 0) AddType(morph, +1);
    if (after == 0) {
      AddType(morph, -1);
      morphs_.erase(it);
    }
  }

  double Cost() const {
    const long double corpus = XLogX(tokens_) - s1_;
    const long double lexicon = XLogX(symbols_) - s2_;
    return static_cast<double>(corpus_weight_ * corpus + lexicon);
  }

 private:
  void AddSymbol(const std::string& sym, int sign) {
    auto it = symbol_counts_.try_emplace(sym, 0).first;
    const std::int64_t before = it->second;
    const std::int64_t after = before + sign;
    s2_ += XLogX(after) - XLogX(before);
    symbols_ += sign;
    it->second = after;
    if (after == 0) symbol_counts_.erase(it);
  }

  void AddType(const std::string& morph, int sign) {
    for (std::string_view cp : SplitCodePoints(morph)) {
      AddSymbol(std::string(cp), sign);
    }
    AddSymbol(std::string(), sign);
  }

  long double corpus_weight_;
  std::unordered_map<std::string, std::int64_t> morphs_;
  std::unordered_map<std::string, std::int64_t> symbol_counts_;
  long double tokens_ = 0, s1_ = 0, symbols_ = 0, s2_ = 0;
};

bool Improves(double candidate, double incumbent) {
  const double eps = 1e-12 * (1.0 + std::abs(incumbent));
  return candidate < incumbent - eps;
}

struct TrainWord {
  std::string text;
  std::int64_t count = 0;
  std::vector<std::size_t> offsets;  // byte offset of each code point + end

  std::string Sub(std::size_t b, std::size_t e) const {
    return text.substr(offsets[b], offsets[e] - offsets[b]);
  }
  std::size_t length() const { return offsets.size() - 1; }
};

TrainWord MakeTrainWord(const std::string& text, std::uint64_t count) {
  TrainWord w{text, static_cast<std::int64_t>(count), {}};
  std::size_t pos = 0;
  for (std::string_view cp : SplitCodePoints(text)) {
    w.offsets.push_back(pos);
    pos += cp.size();
  }
  w.offsets.push_back(pos);
  return w;
}

// Re-splits code points [b, e) of `w` given the rest of the word already in
// `state`. On return the chosen parts are in `state` and appended to `out`.
void Resplit(const TrainWord& w, std::size_t b, std::size_t e,
             CostState* state, std::vector<std::pair<std::size_t, std::size_t>>* out) {
  const std::string whole = w.Sub(b, e);
  state->Add(whole, w.count);
  double best = state->Cost();
  state->Add(whole, -w.count);
  std::size_t best_split = 0;
  for (std::size_t i = b + 1; i < e; ++i) {
    const std::string left = w.Sub(b, i), right = w.Sub(i, e);
    state->Add(left, w.count);
    state->Add(right, w.count);
    const double c = state->Cost();
    state->Add(left, -w.count);
    state->Add(right, -w.count);
    if (Improves(c, best)) {
      best = c;
      best_split = i;
    }
  }
  if (best_split == 0) {
    state->Add(whole, w.count);
    out->emplace_back(b, e);
    return;
  }
  const std::string right = w.Sub(best_split, e);
  state->Add(right, w.count);
  Resplit(w, b, best_split, state, out);
  state->Add(right, -w.count);
  Resplit(w, best_split, e, state, out);
}

void AddSegmentation(const Segmentation& seg, std::int64_t count,
                     CostState* state) {
  for (const std::string& m : seg) state->Add(m, count);
}

}  // namespace

std::string_view SegmenterSourceName(SegmenterSource s) {
  switch (s) {
    case SegmenterSource::kExternalAnalyzer: return "external-analyzer";
    case SegmenterSource::kExternalMorfessor: return "external-morfessor";
    case SegmenterSource::kMdlTrained: return "mdl-trained";
  }
  return "unknown";
}

SegmenterSource ParseSegmenterSource(std::string_view name) {
  if (name == "external-analyzer") return SegmenterSource::kExternalAnalyzer;
  if (name == "external-morfessor") return SegmenterSource::kExternalMorfessor;
  if (name == "mdl-trained") return SegmenterSource::kMdlTrained;
  throw Error("unknown segmenter source '" + std::string(name) + "'");
}

WordCounts CountWords(const Corpus& corpus) {
  WordCounts counts;
  for (const std::string& line : corpus.lines) {
    for (std::string_view w : SplitWhitespace(line)) ++counts[std::string(w)];
  }
  return counts;
}

SegmentationLexicon::SegmentationLexicon(
    std::map<std::string, Segmentation> entries, SegmenterSource source,
    std::size_t duplicate_overrides, std::size_t skipped_nonconcatenating)
    : entries_(std::move(entries)),
      source_(source),
      duplicate_overrides_(duplicate_overrides),
      skipped_(skipped_nonconcatenating) {
  for (const auto& [word, segs] : entries_) {
    if (segs.empty()) throw ContractError("empty segment list for " + word);
    std::string joined;
    for (const std::string& s : segs) {
      if (s.empty()) throw ContractError("empty segment for " + word);
      joined += s;
    }
    if (joined != word) {
      throw ContractError("segments of '" + word + "' do not concatenate to it");
    }
  }
}

Segmentation SegmentationLexicon::Segment(std::string_view word,
                                          SegmentStats* stats) const {
  if (stats) ++stats->lookups;
  auto it = entries_.find(std::string(word));
  if (it == entries_.end()) {
    if (stats) ++stats->misses;
    return {std::string(word)};
  }
  return it->second;
}

SegmentationLexicon LoadLexicon(const std::filesystem::path& path,
                                SegmenterSource source,
                                Normalization normalization) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open lexicon '" + path.string() + "'");
  std::map<std::string, Segmentation> entries;
  std::size_t overrides = 0, skipped = 0, lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (FindInvalidUtf8(line)) {
      throw ParseError(path.string(), lineno, "invalid UTF-8");
    }
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path.string(), lineno, "missing tab separator");
    }
    const std::string word = Normalize(line.substr(0, tab), normalization);
    if (word.empty()) throw ParseError(path.string(), lineno, "empty word");
    std::string field = line.substr(tab + 1);
    if (std::size_t next = field.find('\t'); next != std::string::npos) {
      field.resize(next);
    }
    if (field.empty()) {
      throw ParseError(path.string(), lineno, "empty segment list");
    }
    Segmentation segs;
    std::string joined;
    std::size_t start = 0;
    while (true) {
      const std::size_t sp = field.find(' ', start);
      std::string seg = field.substr(start, sp == std::string::npos
                                                ? std::string::npos
                                                : sp - start);
      if (seg.empty()) throw ParseError(path.string(), lineno, "empty segment");
      segs.push_back(Normalize(seg, normalization));
      joined += segs.back();
      if (sp == std::string::npos) break;
      start = sp + 1;
    }
    if (joined != word) {
      ++skipped;
      continue;
    }
    if (!entries.emplace(word, segs).second) {
      entries[word] = std::move(segs);
      ++overrides;
    }
  }
  return SegmentationLexicon(std::move(entries), source, overrides, skipped);
}

double MdlCost(const WordCounts& words,
               const std::map<std::string, Segmentation>& segmentation,
               double corpus_weight) {
  std::map<std::string, long double> morphs;
  for (const auto& [word, count] : words) {
    auto it = segmentation.find(word);
    if (it == segmentation.end()) {
      morphs[word] += count;
    } else {
      for (const std::string& m : it->second) morphs[m] += count;
    }
  }
  long double tokens = 0, s1 = 0;
  std::map<std::string, long double> symbols;
  for (const auto& [m, c] : morphs) {
    tokens += c;
    s1 += XLogX(c);
    for (std::string_view cp : SplitCodePoints(m)) symbols[std::string(cp)] += 1;
    symbols[std::string()] += 1;
  }
  long double total_symbols = 0, s2 = 0;
  for (const auto& [sym, f] : symbols) {
    total_symbols += f;
    s2 += XLogX(f);
  }
  return static_cast<double>(corpus_weight * (XLogX(tokens) - s1) +
                             (XLogX(total_symbols) - s2));
}

MdlModel::MdlModel(std::map<std::string, std::uint64_t> morph_counts,
                   MdlConfig config)
    : morph_counts_(std::move(morph_counts)), config_(config) {
  for (const auto& [m, c] : morph_counts_) {
    if (c == 0) throw ContractError("morph '" + m + "' has zero count");
    if (m.empty()) throw ContractError("empty morph in MDL model");
    total_ += c;
    max_morph_length_ = std::max(max_morph_length_, CodePointLength(m));
  }
}

Segmentation MdlModel::Segment(std::string_view word) const {
  const std::vector<std::string_view> cps = SplitCodePoints(word);
  const std::size_t n = cps.size();
  if (n == 0) return {};
  const double log_total = std::log(static_cast<double>(std::max<std::uint64_t>(total_, 1)));
  const double unknown_cost = log_total + kUnknownPenalty;
  std::vector<std::size_t> offsets(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + cps[i].size();

  std::vector<double> best(n + 1, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> back(n + 1, 0);
  best[0] = 0.0;
  for (std::size_t end = 1; end <= n; ++end) {
    const std::size_t lo = end > max_morph_length_ ? end - max_morph_length_ : 0;
    for (std::size_t start = lo; start < end; ++start) {
      if (!std::isfinite(best[start])) continue;
      const std::string piece(word.substr(offsets[start], offsets[end] - offsets[start]));
      auto it = morph_counts_.find(piece);
      double cost;
      if (it != morph_counts_.end()) {
        cost = log_total - std::log(static_cast<double>(it->second));
      } else if (end == start + 1) {
        cost = unknown_cost;
      } else {
        continue;
      }
      if (best[start] + cost < best[end]) {
        best[end] = best[start] + cost;
        back[end] = start;
      }
    }
    if (!std::isfinite(best[end])) {
      // Only reachable when max_morph_length_ is 0.
      best[end] = best[end - 1] + unknown_cost;
      back[end] = end - 1;
    }
  }
  Segmentation out;
  for (std::size_t end = n; end > 0; end = back[end]) {
    const std::size_t start = back[end];
    out.emplace_back(word.substr(offsets[start], offsets[end] - offsets[start]));
  }
  std::reverse(out.begin(), out.end());
  return out;
}

MdlTrainingResult TrainMdl(const WordCounts& words, const MdlConfig& config,
                           std::uint64_t seed) {
  if (words.empty()) throw ContractError("MDL training needs a non-empty word list");
  if (config.epochs < 0) throw ContractError("MDL epochs must be non-negative");

  std::vector<TrainWord> train;
  train.reserve(words.size());
  for (const auto& [w, c] : words) {
    if (w.empty() || c == 0) continue;
    train.push_back(MakeTrainWord(w, c));
  }
  if (train.empty()) throw ContractError("MDL training needs a non-empty word list");

  CostState state(config.corpus_weight);
  std::vector<Segmentation> seg(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    seg[i] = {train[i].text};
    state.Add(train[i].text, train[i].count);
  }

  MdlTrainingResult result;
  double current = state.Cost();
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    internal::Shuffle(order, rng);
    bool changed = false;
    for (std::size_t idx : order) {
      const TrainWord& w = train[idx];
      if (w.length() < 2) continue;
      AddSegmentation(seg[idx], -w.count, &state);
      std::vector<std::pair<std::size_t, std::size_t>> parts;
      Resplit(w, 0, w.length(), &state, &parts);
      Segmentation proposal;
      for (auto [b, e] : parts) proposal.push_back(w.Sub(b, e));
      const double candidate = state.Cost();
      if (proposal != seg[idx] && Improves(candidate, current)) {
        seg[idx] = std::move(proposal);
        current = candidate;
        result.step_costs.push_back(current);
        changed = true;
      } else {
        AddSegmentation(proposal, -w.count, &state);
        AddSegmentation(seg[idx], w.count, &state);
      }
    }
    if (!changed) break;
  }

  std::map<std::string, std::uint64_t> morph_counts;
  for (std::size_t i = 0; i < train.size(); ++i) {
    for (const std::string& m : seg[i]) {
      morph_counts[m] += static_cast<std::uint64_t>(train[i].count);
    }
    result.segmentation.emplace(train[i].text, seg[i]);
  }
  result.initial_cost = MdlCost(words, {}, config.corpus_weight);
  result.final_cost = MdlCost(words, result.segmentation, config.corpus_weight);
  result.model = MdlModel(std::move(morph_counts), config);
  return result;
}

void SaveMdlModel(const MdlModel& model, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["format"] = kMdlFormatName;
  j["version"] = kMdlFormatVersion;
  nlohmann::ordered_json morphs = nlohmann::ordered_json::array();
  for (const auto& [m, c] : model.morph_counts()) {
    morphs.push_back({{"morph", m}, {"count", c}});
  }
  j["morphs"] = std::move(morphs);
  j["config"] = {{"epochs", model.config().epochs},
                 {"corpus_weight", model.config().corpus_weight}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write MDL model '" + path.string() + "'");
  out << j.dump(1) << '\n';
}

MdlModel LoadMdlModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open MDL model '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("corrupted MDL model '" + path.string() + "': " + e.what());
  }
  auto field = [&](const char* name) -> const nlohmann::json& {
    if (!j.contains(name)) {
      throw Error("MDL model '" + path.string() + "' lacks field '" + name + "'");
    }
    return j.at(name);
  };
  if (!field("version").is_number_integer() ||
      field("version").get<int>() != kMdlFormatVersion) {
    throw Error("MDL model '" + path.string() + "': unsupported field 'version'");
  }
  try {
    std::map<std::string, std::uint64_t> counts;
    for (const auto& m : field("morphs")) {
      counts[m.at("morph").get<std::string>()] = m.at("count").get<std::uint64_t>();
    }
    MdlConfig config;
    const auto& c = field("config");
    config.epochs = c.at("epochs").get<int>();
    config.corpus_weight = c.at("corpus_weight").get<double>();
    return MdlModel(std::move(counts), config);
  } catch (const nlohmann::json::exception& e) {
    throw Error("MDL model '" + path.string() + "': bad field 'morphs' or 'config': " +
                e.what());
  }
}

Segmentation Segmenter::Segment(std::string_view word, SegmentStats* stats) const {
  if (lexicon_) return lexicon_->Segment(word, stats);
  if (mdl_) {
    if (stats) ++stats->lookups;
    return mdl_->Segment(word);
  }
  return {std::string(word)};
}

Segmentation SegmentWord(std::string_view word, const Segmenter& segmenter,
                         SegmentStats* stats) {
  return segmenter.Segment(word, stats);
}

std::string_view MarkerPlacementName(MarkerPlacement p) {
  switch (p) {
    case MarkerPlacement::kSuffixNonFinal: return "suffix";
    case MarkerPlacement::kPrefixNonInitial: return "prefix";
    case MarkerPlacement::kNone: return "none";
  }
  return "none";
}

MarkerPlacement ParseMarkerPlacement(std::string_view name) {
  if (name == "suffix") return MarkerPlacement::kSuffixNonFinal;
  if (name == "prefix") return MarkerPlacement::kPrefixNonInitial;
  if (name == "none") return MarkerPlacement::kNone;
  throw Error("unknown marker placement '" + std::string(name) + "'");
}

std::string SegmentLine(std::string_view line, const Segmenter& segmenter,
                        const MarkerPolicy& policy, SegmentStats* stats) {
  std::string out;
  for (std::string_view word : SplitWhitespace(line)) {
    const Segmentation segs = segmenter.Segment(word, stats);
    for (std::size_t i = 0; i < segs.size(); ++i) {
      if (!out.empty()) out += ' ';
      if (policy.placement == MarkerPlacement::kPrefixNonInitial && i > 0) {
        out += policy.marker;
      }
      out += segs[i];
      if (policy.placement == MarkerPlacement::kSuffixNonFinal &&
          i + 1 < segs.size()) {
        out += policy.marker;
      }
    }
  }
  return out;
}

Corpus ApplySegmentation(const Corpus& corpus, const Segmenter& segmenter,
                         const MarkerPolicy& policy, SegmentStats* stats) {
  Corpus out;
  out.lines.reserve(corpus.lines.size());
  for (const std::string& line : corpus.lines) {
    out.lines.push_back(SegmentLine(line, segmenter, policy, stats));
  }
  return out;
}

std::string JoinSegmentedLine(std::string_view line, const MarkerPolicy& policy) {
  const std::string& mk = policy.marker;
  std::string out;
  bool glue_next = false;
  for (std::string_view tok : SplitWhitespace(line)) {
    bool glue_prev = false;
    if (policy.placement == MarkerPlacement::kPrefixNonInitial &&
        tok.size() > mk.size() && tok.substr(0, mk.size()) == mk) {
      tok.remove_prefix(mk.size());
      glue_prev = true;
    }
    bool ends_marked = false;
    if (policy.placement == MarkerPlacement::kSuffixNonFinal &&
        tok.size() > mk.size() && tok.substr(tok.size() - mk.size()) == mk) {
      tok.remove_suffix(mk.size());
      ends_marked = true;
    }
    if (!out.empty() && !glue_next && !glue_prev) out += ' ';
    out += tok;
    glue_next = ends_marked;
  }
  return out;
}

}  // namespace morphotok
