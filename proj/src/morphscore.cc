#include "morphotok/morphscore.h"

#include <algorithm>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "morphotok/error.h"

namespace morphotok {
namespace {

using Json = nlohmann::ordered_json;

std::string Join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string Concat(const std::vector<std::string>& parts) {
  std::string out;
  for (const std::string& p : parts) out += p;
  return out;
}

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

Json Averages(const MorphAverages& a) {
  auto value = [](const std::optional<double>& v) -> Json {
    return v ? Json(*v) : Json(nullptr);
  };
  return {{"recall", value(a.recall)},
          {"precision", value(a.precision)},
          {"f1", value(a.f1)}};
}

double HarmonicMean(double a, double b) {
  return a + b > 0.0 ? 2.0 * a * b / (a + b) : 0.0;
}

}  // namespace

std::string_view MorphCategoryName(MorphCategory c) {
  switch (c) {
    case MorphCategory::kDerivational: return "derivational";
    case MorphCategory::kInflectional: return "inflectional";
    case MorphCategory::kUnspecified: return "unspecified";
  }
  return "?";
}

MorphCategory ParseMorphCategory(std::string_view name) {
  for (MorphCategory c : {MorphCategory::kDerivational,
                          MorphCategory::kInflectional,
                          MorphCategory::kUnspecified}) {
    if (name == MorphCategoryName(c)) return c;
  }
  throw Error("unknown morpheme category '" + std::string(name) + "'");
}

std::string_view BoundaryUnitName(BoundaryUnit u) {
  return u == BoundaryUnit::kCodePoint ? "codepoint" : "grapheme";
}

BoundaryUnit ParseBoundaryUnit(std::string_view name) {
  if (name == "codepoint") return BoundaryUnit::kCodePoint;
  if (name == "grapheme") return BoundaryUnit::kGrapheme;
  throw Error("unknown boundary unit '" + std::string(name) +
              "' (expected codepoint or grapheme)");
}

std::vector<RawGoldEntry> LoadRawGoldset(const std::filesystem::path& path,
                                         Normalization normalization) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  const std::string source = path.string();
  std::vector<RawGoldEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (IsBlank(line)) continue;
    if (auto bad = FindInvalidUtf8(line)) {
      throw ParseError(source, lineno,
                       "invalid UTF-8 at byte offset " + std::to_string(*bad));
    }
    const std::vector<std::string_view> fields = SplitTabs(line);
    if (fields.size() < 2 || fields.size() > 3) {
      throw ParseError(source, lineno,
                       "expected word<TAB>segments[<TAB>category]");
    }
    RawGoldEntry e;
    e.line = lineno;
    e.word = Normalize(fields[0], normalization);
    if (e.word.empty() || SplitWhitespace(e.word).size() != 1) {
      throw ParseError(source, lineno, "word must be a single non-empty token");
    }
    for (std::string_view seg : SplitWhitespace(fields[1])) {
      e.segments.push_back(Normalize(seg, normalization));
    }
    if (e.segments.empty()) throw ParseError(source, lineno, "no segments");
    if (fields.size() == 3 && !fields[2].empty()) {
      try {
        e.category = ParseMorphCategory(fields[2]);
      } catch (const Error& err) {
        throw ParseError(source, lineno, err.what());
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

GoldFilterResult FilterGoldset(const std::vector<RawGoldEntry>& raw) {
  GoldFilterResult result;
  for (const RawGoldEntry& e : raw) {
    std::optional<BoundarySet> b = BoundariesOf(e.word, e.segments);
    if (!b) {
      result.dropped.push_back(
          {e, "segments concatenate to '" + Concat(e.segments) + "', not '" +
                  e.word + "'"});
      continue;
    }
    result.kept.push_back({e.word, e.segments, e.category, std::move(*b)});
  }
  return result;
}

std::vector<GoldEntry> LoadGoldset(const std::filesystem::path& path,
                                   Normalization normalization) {
  GoldFilterResult f = FilterGoldset(LoadRawGoldset(path, normalization));
  if (!f.dropped.empty()) {
    const DroppedGoldEntry& d = f.dropped.front();
    throw ParseError(path.string(), d.entry.line, d.reason);
  }
  return std::move(f.kept);
}

void WriteGoldset(const std::vector<GoldEntry>& entries,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  for (const GoldEntry& e : entries) {
    out << e.word << '\t' << Join(e.segments, ' ') << '\t'
        << MorphCategoryName(e.category) << '\n';
  }
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void WriteDropped(const std::vector<DroppedGoldEntry>& dropped,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  for (const DroppedGoldEntry& d : dropped) {
    out << d.entry.word << '\t' << Join(d.entry.segments, ' ') << '\t'
        << MorphCategoryName(d.entry.category) << '\t' << d.reason << '\n';
  }
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::optional<BoundarySet> BoundariesOf(std::string_view word,
                                        const std::vector<std::string>& pieces) {
  if (pieces.empty() || Concat(pieces) != word) return std::nullopt;
  BoundarySet out;
  std::size_t prefix = 0;
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
    const std::size_t len = CodePointLength(pieces[i]);
    if (len == 0) continue;
    prefix += len;
    out.push_back(prefix);
  }
  return out;
}

BoundarySet ToGraphemeBoundaries(std::string_view word,
                                 const BoundarySet& code_point_boundaries) {
  const std::vector<std::size_t> clusters = GraphemeBoundaries(word);
  // clusters[k] is the code-point offset where cluster k starts.
  const std::size_t cluster_count = clusters.size() - 1;
  BoundarySet out;
  for (std::size_t b : code_point_boundaries) {
    auto it = std::lower_bound(clusters.begin(), clusters.end(), b);
    const auto index = static_cast<std::size_t>(std::distance(clusters.begin(), it));
    if (index == 0 || index >= cluster_count) continue;
    if (out.empty() || out.back() != index) out.push_back(index);
  }
  return out;
}

MorphWordScore ScoreWord(const BoundarySet& gold, const BoundarySet& pred) {
  if (gold.empty() || pred.empty()) {
    throw ContractError("ScoreWord needs non-empty gold and predicted boundaries");
  }
  MorphWordScore s;
  s.gold = gold;
  s.pred = pred;
  BoundarySet common;
  std::set_intersection(gold.begin(), gold.end(), pred.begin(), pred.end(),
                        std::back_inserter(common));
  s.matched = common.size();
  s.recall = static_cast<double>(s.matched) / static_cast<double>(gold.size());
  s.precision = static_cast<double>(s.matched) / static_cast<double>(pred.size());
  s.f1 = HarmonicMean(s.recall, s.precision);
  return s;
}

MorphReport EvaluateMorphology(const std::vector<GoldEntry>& gold,
                               const TokenizerModel& model, BoundaryUnit unit) {
  MorphReport report;
  report.unit = unit;
  std::size_t matched = 0, gold_total = 0, pred_total = 0;
  double recall_sum = 0.0, precision_sum = 0.0, f1_sum = 0.0;
  std::vector<TokenId> ids;
  for (const GoldEntry& entry : gold) {
    ids.clear();
    for (const std::string& pt : model.pre_tokenizer().SplitWord(entry.word)) {
      model.EncodePreToken(pt, &ids);
    }
    if (ids.size() <= 1) {
      ++report.excluded_single_token;
      continue;
    }
    BoundarySet gold_b = entry.boundaries;
    if (unit == BoundaryUnit::kGrapheme) {
      gold_b = ToGraphemeBoundaries(entry.word, gold_b);
    }
    if (gold_b.empty()) {
      ++report.excluded_no_gold_boundary;
      continue;
    }
    std::vector<std::string> pieces;
    bool has_unk = false;
    for (TokenId id : ids) {
      has_unk = has_unk || id == model.unk_id();
      pieces.push_back(model.TokenOf(id));
    }
    std::optional<BoundarySet> pred =
        has_unk ? std::nullopt : BoundariesOf(entry.word, pieces);
    if (pred && unit == BoundaryUnit::kGrapheme) {
      pred = ToGraphemeBoundaries(entry.word, *pred);
    }
    if (!pred) {
      ++report.excluded_unk_or_mismatch;
      continue;
    }
    // Only reachable in grapheme mode, when every split falls inside the
    // last cluster.
    if (pred->empty()) {
      ++report.excluded_single_token;
      continue;
    }
    MorphWordScore s = ScoreWord(gold_b, *pred);
    s.word = entry.word;
    matched += s.matched;
    gold_total += s.gold.size();
    pred_total += s.pred.size();
    recall_sum += s.recall;
    precision_sum += s.precision;
    f1_sum += s.f1;
    report.per_word.push_back(std::move(s));
  }
  report.evaluated = report.per_word.size();
  if (report.evaluated > 0) {
    const auto n = static_cast<double>(report.evaluated);
    report.macro = {recall_sum / n, precision_sum / n, f1_sum / n};
    const double r = static_cast<double>(matched) / static_cast<double>(gold_total);
    const double p = static_cast<double>(matched) / static_cast<double>(pred_total);
    report.micro = {r, p, HarmonicMean(r, p)};
  }
  return report;
}

std::string MorphReportJson(const MorphReport& report) {
  Json j;
  j["macro"] = Averages(report.macro);
  j["micro"] = Averages(report.micro);
  j["exclusions"] = {{"single_token", report.excluded_single_token},
                     {"no_gold_boundary", report.excluded_no_gold_boundary},
                     {"unk_or_mismatch", report.excluded_unk_or_mismatch}};
  j["evaluated"] = report.evaluated;
  j["unit"] = BoundaryUnitName(report.unit);
  return j.dump(1) + "\n";
}

std::string MorphPerWordJsonl(const MorphReport& report) {
  std::string out;
  for (const MorphWordScore& s : report.per_word) {
    Json j;
    j["word"] = s.word;
    j["gold"] = s.gold;
    j["pred"] = s.pred;
    j["recall"] = s.recall;
    j["precision"] = s.precision;
    j["f1"] = s.f1;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace morphotok
