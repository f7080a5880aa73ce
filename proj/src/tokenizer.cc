#include "morphotok/tokenizer.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <memory>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "fingerprint.h"
#include "morphotok/error.h"
#include "morphotok/unicode.h"

namespace morphotok {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::string_view kFormat = "morphotok-tokenizer";

std::filesystem::path Resolve(const std::filesystem::path& p,
                              const std::filesystem::path& base) {
  if (p.is_absolute() || base.empty()) return p;
  return base / p;
}

std::set<std::string> AlphabetOf(const PreTokenCounts& counts) {
  std::set<std::string> alphabet;
  for (const auto& [text, count] : counts) {
    for (std::string_view cp : SplitCodePoints(text)) alphabet.emplace(cp);
  }
  return alphabet;
}

void CheckAlphabetFits(std::size_t vocab_size, std::size_t alphabet) {
  if (vocab_size < alphabet + 1) {
    throw ContractError("vocab size " + std::to_string(vocab_size) +
                        " is smaller than alphabet (" + std::to_string(alphabet) +
                        ") + specials (1) = " +
                        std::to_string(alphabet + 1));
  }
}

// Most frequent first, ties by byte order; never picks the unk surface.
std::vector<std::string> TopByFrequency(const PreTokenCounts& counts,
                                        std::size_t n) {
  std::vector<std::pair<std::string, std::uint64_t>> items;
  for (const auto& [text, count] : counts) {
    if (text != kUnkToken) items.emplace_back(text, count);
  }
  if (items.size() < n) {
    throw ContractError("corpus has only " + std::to_string(items.size()) +
                        " distinct pre-tokens; vocab size " +
                        std::to_string(n + 1) + " needs " + std::to_string(n));
  }
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::move(items[i].first));
  return out;
}

}  // namespace

std::string_view FamilyName(Family f) {
  switch (f) {
    case Family::kCharacter: return "character";
    case Family::kWord: return "word";
    case Family::kMorphemic: return "morphemic";
    case Family::kBpe: return "bpe";
    case Family::kUnigram: return "unigram";
  }
  return "?";
}

Family ParseFamily(std::string_view name) {
  for (Family f : {Family::kCharacter, Family::kWord, Family::kMorphemic,
                   Family::kBpe, Family::kUnigram}) {
    if (name == FamilyName(f)) return f;
  }
  throw Error("unknown tokenizer family '" + std::string(name) +
              "' (expected character, word, morphemic, bpe or unigram)");
}

std::string_view PreTokenizerKindName(PreTokenizerSpec::Kind kind) {
  switch (kind) {
    case PreTokenizerSpec::Kind::kNone: return "none";
    case PreTokenizerSpec::Kind::kLexicon: return "lexicon";
    case PreTokenizerSpec::Kind::kMdl: return "mdl";
  }
  return "?";
}

PreTokenizerSpec PreTokenizerSpec::Parse(std::string_view text) {
  PreTokenizerSpec spec;
  if (text == "none") return spec;
  const std::size_t colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  if (colon == std::string_view::npos || colon + 1 == text.size() ||
      (kind != "lexicon" && kind != "mdl")) {
    throw Error("invalid pre-tokenizer '" + std::string(text) +
                "' (expected none, lexicon:PATH or mdl:PATH)");
  }
  spec.kind = kind == "lexicon" ? Kind::kLexicon : Kind::kMdl;
  spec.path = std::string(text.substr(colon + 1));
  return spec;
}

std::string PreTokenizerSpec::ToString() const {
  if (kind == Kind::kNone) return "none";
  return std::string(PreTokenizerKindName(kind)) + ":" + path;
}

PreTokenizer PreTokenizer::Load(PreTokenizerSpec spec,
                                const std::filesystem::path& base) {
  if (spec.kind == PreTokenizerSpec::Kind::kNone) {
    return PreTokenizer(std::move(spec), Segmenter());
  }
  const std::filesystem::path file = Resolve(spec.path, base);
  const std::string digest = FileFingerprint(file);
  if (!spec.fingerprint.empty() && spec.fingerprint != digest) {
    throw Error("pre_tokenizer.fingerprint: segmenter file '" + file.string() +
                "' differs from the one the model was trained with");
  }
  spec.fingerprint = digest;
  spec.path = file.string();
  Segmenter segmenter;
  if (spec.kind == PreTokenizerSpec::Kind::kLexicon) {
    segmenter = Segmenter(std::make_shared<const SegmentationLexicon>(
        LoadLexicon(file)));
  } else {
    segmenter = Segmenter(std::make_shared<const MdlModel>(LoadMdlModel(file)));
  }
  return PreTokenizer(std::move(spec), std::move(segmenter));
}

std::vector<std::string> PreTokenizer::SplitWord(std::string_view word) const {
  return segmenter_.Segment(word);
}

PreTokenCounts PreTokenizer::Count(const Corpus& corpus) const {
  PreTokenCounts counts;
  for (const std::string& line : corpus.lines) {
    for (std::string_view word : SplitWhitespace(line)) {
      for (std::string& piece : SplitWord(word)) ++counts[std::move(piece)];
    }
  }
  return counts;
}

TokenizerModel::TokenizerModel(Parts parts) : parts_(std::move(parts)) {
  const std::vector<std::string>& vocab = parts_.vocab;
  if (vocab.empty() || vocab[0] != kUnkToken) {
    throw ContractError("vocab must start with the unk token " +
                        std::string(kUnkToken));
  }
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (vocab[i].empty()) {
      throw ContractError("vocab entry " + std::to_string(i) + " is empty");
    }
    if (!ids_.emplace(vocab[i], static_cast<TokenId>(i)).second) {
      throw ContractError("duplicate vocab entry '" + vocab[i] + "'");
    }
  }
  const Family family = parts_.family;
  if (family != Family::kCharacter &&
      vocab.size() != parts_.requested_vocab_size) {
    throw ContractError("vocab has " + std::to_string(vocab.size()) +
                        " entries but " +
                        std::to_string(parts_.requested_vocab_size) +
                        " were requested");
  }
  if (family == Family::kMorphemic && parts_.pre_tokenizer.segmenter().empty()) {
    throw ContractError("morphemic family requires a segmenter");
  }
  if (family != Family::kBpe && !parts_.merges.empty()) {
    throw ContractError("merges are only valid for the bpe family");
  }
  if (family != Family::kUnigram && !parts_.piece_log_probs.empty()) {
    throw ContractError("piece log-probabilities are only valid for unigram");
  }
  if (family == Family::kBpe) {
    for (const auto& [left, right] : parts_.merges) {
      if (!ids_.count(left) || !ids_.count(right) || !ids_.count(left + right)) {
        throw ContractError("merge ('" + left + "', '" + right +
                            "') references a token outside the vocab");
      }
    }
    merge_table_ = BpeMergeTable(parts_.merges);
  }
  if (family == Family::kUnigram) {
    const std::vector<double>& lp = parts_.piece_log_probs;
    if (lp.size() != vocab.size()) {
      throw ContractError("piece log-probabilities do not align with the vocab");
    }
    for (std::size_t i = 0; i < lp.size(); ++i) {
      if (!std::isfinite(lp[i]) || lp[i] > 0.0) {
        throw ContractError("piece '" + vocab[i] + "' has invalid log-probability");
      }
      if (i == 0) continue;
      pieces_.log_probs.emplace(vocab[i], lp[i]);
      pieces_.max_piece_length =
          std::max(pieces_.max_piece_length, CodePointLength(vocab[i]));
    }
    pieces_.unk_log_prob = lp[0];
  }
}

TokenId TokenizerModel::IdOf(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? -1 : it->second;
}

const std::string& TokenizerModel::TokenOf(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= parts_.vocab.size()) {
    throw ContractError("token id " + std::to_string(id) +
                        " is out of range for a vocab of " +
                        std::to_string(parts_.vocab.size()));
  }
  return parts_.vocab[static_cast<std::size_t>(id)];
}

void TokenizerModel::EncodePreToken(std::string_view pretoken,
                                    std::vector<TokenId>* out) const {
  auto emit = [&](std::string_view token) {
    const TokenId id = IdOf(token);
    out->push_back(id < 0 ? kUnkId : id);
  };
  switch (parts_.family) {
    case Family::kCharacter:
      for (std::string_view cp : SplitCodePoints(pretoken)) emit(cp);
      return;
    case Family::kWord:
    case Family::kMorphemic:
      emit(pretoken);
      return;
    case Family::kBpe:
      for (const std::string& s : merge_table_.Apply(pretoken)) emit(s);
      return;
    case Family::kUnigram: {
      const UnigramSegmentation seg =
          ViterbiSegment(pretoken, pieces_.log_probs, pieces_.max_piece_length,
                         pieces_.unk_log_prob);
      for (const std::string& s : seg.pieces) emit(s);
      return;
    }
  }
}

Encoding TokenizerModel::Encode(std::string_view text) const {
  Encoding enc;
  for (std::string_view word : SplitWhitespace(text)) {
    WordSpan span;
    span.begin = enc.ids.size();
    for (const std::string& pt : parts_.pre_tokenizer.SplitWord(word)) {
      EncodePreToken(pt, &enc.ids);
    }
    span.end = enc.ids.size();
    enc.word_spans.push_back(span);
  }
  return enc;
}

std::string TokenizerModel::Decode(const Encoding& encoding) const {
  std::size_t expected = 0;
  for (const WordSpan& span : encoding.word_spans) {
    if (span.begin != expected || span.end < span.begin ||
        span.end > encoding.ids.size()) {
      throw ContractError("word spans do not tile the token sequence");
    }
    expected = span.end;
  }
  if (expected != encoding.ids.size()) {
    throw ContractError("word spans do not cover all " +
                        std::to_string(encoding.ids.size()) + " tokens");
  }
  std::string out;
  for (std::size_t w = 0; w < encoding.word_spans.size(); ++w) {
    if (w > 0) out += ' ';
    const WordSpan& span = encoding.word_spans[w];
    for (std::size_t i = span.begin; i < span.end; ++i) {
      out += TokenOf(encoding.ids[i]);
    }
  }
  return out;
}

TokenizerModel TrainBpe(const Corpus& corpus, std::size_t vocab_size,
                        const PreTokenizer& pre_tokenizer) {
  const PreTokenCounts counts = pre_tokenizer.Count(corpus);
  CheckAlphabetFits(vocab_size, AlphabetOf(counts).size());
  BpeLearnResult learned = LearnBpe(counts, vocab_size - 1);
  TokenizerModel::Parts parts;
  parts.family = Family::kBpe;
  parts.vocab.emplace_back(kUnkToken);
  std::move(learned.symbols.begin(), learned.symbols.end(),
            std::back_inserter(parts.vocab));
  parts.merges = std::move(learned.merges);
  parts.pre_tokenizer = pre_tokenizer;
  parts.requested_vocab_size = vocab_size;
  return TokenizerModel(std::move(parts));
}

TokenizerModel TrainUnigram(const Corpus& corpus, std::size_t vocab_size,
                            const PreTokenizer& pre_tokenizer,
                            const UnigramConfig& config) {
  const PreTokenCounts counts = pre_tokenizer.Count(corpus);
  CheckAlphabetFits(vocab_size, AlphabetOf(counts).size());
  std::vector<UnigramPiece> pieces = LearnUnigram(counts, vocab_size - 1, config);

  double min_lp = 0.0;
  for (const UnigramPiece& p : pieces) min_lp = std::min(min_lp, p.log_prob);
  const double unk_lp = min_lp - config.unk_penalty;
  // Renormalize with the unk mass included.
  double z = std::exp(unk_lp);
  for (const UnigramPiece& p : pieces) z += std::exp(p.log_prob);
  const double log_z = std::log(z);
  for (UnigramPiece& p : pieces) p.log_prob = std::min(0.0, p.log_prob - log_z);

  std::sort(pieces.begin(), pieces.end(),
            [](const UnigramPiece& a, const UnigramPiece& b) {
              if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
              return a.piece < b.piece;
            });
  TokenizerModel::Parts parts;
  parts.family = Family::kUnigram;
  parts.vocab.emplace_back(kUnkToken);
  parts.piece_log_probs.push_back(unk_lp - log_z);
  for (UnigramPiece& p : pieces) {
    parts.vocab.push_back(std::move(p.piece));
    parts.piece_log_probs.push_back(p.log_prob);
  }
  parts.pre_tokenizer = pre_tokenizer;
  parts.requested_vocab_size = vocab_size;
  return TokenizerModel(std::move(parts));
}

TokenizerModel BuildLookup(const Corpus& corpus, Family family,
                           std::size_t vocab_size,
                           const PreTokenizer& pre_tokenizer) {
  if (family == Family::kMorphemic && pre_tokenizer.segmenter().empty()) {
    throw ContractError("morphemic family requires a segmenter "
                        "(--pre lexicon:PATH or mdl:PATH)");
  }
  const PreTokenCounts counts = pre_tokenizer.Count(corpus);
  TokenizerModel::Parts parts;
  parts.family = family;
  parts.vocab.emplace_back(kUnkToken);
  parts.pre_tokenizer = pre_tokenizer;
  parts.requested_vocab_size = vocab_size;
  switch (family) {
    case Family::kCharacter: {
      for (const std::string& cp : AlphabetOf(counts)) parts.vocab.push_back(cp);
      if (vocab_size != 0 && vocab_size != parts.vocab.size()) {
        spdlog::warn(
            "character family ignores vocab size {}; alphabet gives {} tokens",
            vocab_size, parts.vocab.size());
      }
      break;
    }
    case Family::kWord:
    case Family::kMorphemic: {
      if (vocab_size < 1) throw ContractError("vocab size must be at least 1");
      for (std::string& s : TopByFrequency(counts, vocab_size - 1)) {
        parts.vocab.push_back(std::move(s));
      }
      break;
    }
    default:
      throw ContractError("BuildLookup needs a character, word or morphemic family");
  }
  return TokenizerModel(std::move(parts));
}

TokenizerModel TrainTokenizer(const Corpus& corpus, Family family,
                              std::size_t vocab_size,
                              const PreTokenizer& pre_tokenizer,
                              const UnigramConfig& unigram_config) {
  switch (family) {
    case Family::kBpe: return TrainBpe(corpus, vocab_size, pre_tokenizer);
    case Family::kUnigram:
      return TrainUnigram(corpus, vocab_size, pre_tokenizer, unigram_config);
    default: return BuildLookup(corpus, family, vocab_size, pre_tokenizer);
  }
}

namespace {

std::string SerializeWithPath(const TokenizerModel& model,
                              const std::string& segmenter_path) {
  Json j;
  j["format"] = kFormat;
  j["version"] = kModelFormatVersion;
  j["family"] = FamilyName(model.family());
  j["requested_vocab_size"] = model.requested_vocab_size();
  j["vocab"] = model.vocab();
  if (model.family() == Family::kBpe) {
    Json merges = Json::array();
    for (const auto& [l, r] : model.merges()) merges.push_back({l, r});
    j["merges"] = std::move(merges);
  }
  if (model.family() == Family::kUnigram) {
    j["piece_logprobs"] = model.piece_log_probs();
  }
  const PreTokenizerSpec& spec = model.pre_tokenizer().spec();
  Json pre;
  pre["kind"] = PreTokenizerKindName(spec.kind);
  if (spec.kind != PreTokenizerSpec::Kind::kNone) {
    pre["path"] = segmenter_path;
    pre["fingerprint"] = spec.fingerprint;
  }
  j["pre_tokenizer"] = std::move(pre);
  j["marker"] = {{"string", spec.marker.marker},
                 {"placement", MarkerPlacementName(spec.marker.placement)}};
  j["unk"] = {{"token", kUnkToken}, {"id", kUnkId}};
  return j.dump(1) + "\n";
}

const Json& Require(const Json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) {
    throw Error("model field '" + std::string(field) + "' is missing");
  }
  return *it;
}

[[noreturn]] void BadField(const std::string& field, const std::string& what) {
  throw Error("model field '" + field + "': " + what);
}

template <typename T>
T As(const Json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    BadField(field, "has the wrong type");
  }
}

}  // namespace

std::string SerializeModel(const TokenizerModel& model) {
  return SerializeWithPath(model, model.pre_tokenizer().spec().path);
}

TokenizerModel DeserializeModel(std::string_view text,
                                const std::filesystem::path& base) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error("model file must hold a JSON object");
  if (As<std::string>(Require(j, "format"), "format") != kFormat) {
    BadField("format", "expected \"" + std::string(kFormat) + "\"");
  }
  const int version = As<int>(Require(j, "version"), "version");
  if (version != kModelFormatVersion) {
    BadField("version", "unsupported version " + std::to_string(version) +
                            " (expected " + std::to_string(kModelFormatVersion) +
                            ")");
  }
  TokenizerModel::Parts parts;
  try {
    parts.family = ParseFamily(As<std::string>(Require(j, "family"), "family"));
  } catch (const Error& e) {
    BadField("family", e.what());
  }
  parts.requested_vocab_size = As<std::size_t>(
      Require(j, "requested_vocab_size"), "requested_vocab_size");
  parts.vocab = As<std::vector<std::string>>(Require(j, "vocab"), "vocab");
  if (parts.family == Family::kBpe) {
    const Json& merges = Require(j, "merges");
    if (!merges.is_array()) BadField("merges", "expected an array");
    for (std::size_t i = 0; i < merges.size(); ++i) {
      const std::string field = "merges[" + std::to_string(i) + "]";
      auto pair = As<std::vector<std::string>>(merges[i], field);
      if (pair.size() != 2) BadField(field, "expected two strings");
      parts.merges.emplace_back(std::move(pair[0]), std::move(pair[1]));
    }
  }
  if (parts.family == Family::kUnigram) {
    parts.piece_log_probs =
        As<std::vector<double>>(Require(j, "piece_logprobs"), "piece_logprobs");
  }
  const Json& unk = Require(j, "unk");
  if (!unk.is_object() ||
      As<std::string>(Require(unk, "token"), "unk.token") != kUnkToken ||
      As<int>(Require(unk, "id"), "unk.id") != kUnkId) {
    BadField("unk", "expected {\"token\": \"<unk>\", \"id\": 0}");
  }

  const Json& pre = Require(j, "pre_tokenizer");
  if (!pre.is_object()) BadField("pre_tokenizer", "expected an object");
  PreTokenizerSpec spec;
  const std::string kind = As<std::string>(Require(pre, "kind"), "pre_tokenizer.kind");
  if (kind == "lexicon") {
    spec.kind = PreTokenizerSpec::Kind::kLexicon;
  } else if (kind == "mdl") {
    spec.kind = PreTokenizerSpec::Kind::kMdl;
  } else if (kind != "none") {
    BadField("pre_tokenizer.kind", "unknown kind '" + kind + "'");
  }
  if (spec.kind != PreTokenizerSpec::Kind::kNone) {
    spec.path = As<std::string>(Require(pre, "path"), "pre_tokenizer.path");
    spec.fingerprint =
        As<std::string>(Require(pre, "fingerprint"), "pre_tokenizer.fingerprint");
  }
  const Json& marker = Require(j, "marker");
  if (!marker.is_object()) BadField("marker", "expected an object");
  spec.marker.marker = As<std::string>(Require(marker, "string"), "marker.string");
  try {
    spec.marker.placement = ParseMarkerPlacement(
        As<std::string>(Require(marker, "placement"), "marker.placement"));
  } catch (const Error& e) {
    BadField("marker.placement", e.what());
  }
  parts.pre_tokenizer = PreTokenizer::Load(std::move(spec), base);

  try {
    return TokenizerModel(std::move(parts));
  } catch (const ContractError& e) {
    throw Error(std::string("model file is inconsistent: ") + e.what());
  }
}

void SaveModel(const TokenizerModel& model, const std::filesystem::path& path) {
  std::string segmenter_path = model.pre_tokenizer().spec().path;
  if (!segmenter_path.empty()) {
    const std::filesystem::path dir =
        std::filesystem::absolute(path).parent_path();
    const std::filesystem::path rel =
        std::filesystem::absolute(segmenter_path).lexically_normal()
            .lexically_relative(dir.lexically_normal());
    if (!rel.empty()) segmenter_path = rel.generic_string();
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << SerializeWithPath(model, segmenter_path);
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

TokenizerModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return DeserializeModel(buffer.str(), path.parent_path());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::string FileFingerprint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return internal::FingerprintOf(buffer.str()).Hex();
}

}  // namespace morphotok
