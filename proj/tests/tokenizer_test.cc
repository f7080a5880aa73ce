#include "morphotok/tokenizer.h"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "morphotok/error.h"
#include "support.h"

namespace morphotok {
namespace {

using testing::DataDir;
using testing::ReadFile;
using testing::TempDir;
using testing::WriteFile;

std::vector<std::string> Tokens(const TokenizerModel& m, const Encoding& e) {
  std::vector<std::string> out;
  for (TokenId id : e.ids) out.push_back(m.TokenOf(id));
  return out;
}

const Corpus& ToyCorpus() {
  static const Corpus c = ReadCorpus(DataDir() / "toy" / "corpus.txt");
  return c;
}

PreTokenizer LexiconPre(std::map<std::string, Segmentation> entries) {
  return PreTokenizer(PreTokenizerSpec{},
                      Segmenter(std::make_shared<const SegmentationLexicon>(SegmentationLexicon(
                          std::move(entries), SegmenterSource::kExternalAnalyzer))));
}

PreTokenizer ToyLexiconPre() {
  return PreTokenizer::Load(
      PreTokenizerSpec::Parse("lexicon:" + (DataDir() / "toy" / "lexicon.tsv").string()));
}

TEST(Family, NamesRoundTrip) {
  for (Family f : {Family::kCharacter, Family::kWord, Family::kMorphemic, Family::kBpe,
                   Family::kUnigram}) {
    EXPECT_EQ(ParseFamily(FamilyName(f)), f);
  }
  EXPECT_ANY_THROW(ParseFamily("wordpiece"));
}

TEST(PreTokenizerSpec, ParsesForms) {
  EXPECT_EQ(PreTokenizerSpec::Parse("none").kind, PreTokenizerSpec::Kind::kNone);
  const PreTokenizerSpec lex = PreTokenizerSpec::Parse("lexicon:a/b.tsv");
  EXPECT_EQ(lex.kind, PreTokenizerSpec::Kind::kLexicon);
  EXPECT_EQ(lex.path, "a/b.tsv");
  EXPECT_EQ(PreTokenizerSpec::Parse("mdl:m.json").kind, PreTokenizerSpec::Kind::kMdl);
  EXPECT_ANY_THROW(PreTokenizerSpec::Parse("lexicon:"));
  EXPECT_ANY_THROW(PreTokenizerSpec::Parse("bogus"));
}

TEST(BuildLookup, WordFamilyKeepsMostFrequent) {
  const Corpus c{{"the the the the the the the the the the cat cat cat sat"}};
  const TokenizerModel m = BuildLookup(c, Family::kWord, 3, PreTokenizer{});
  EXPECT_EQ(m.vocab(), (std::vector<std::string>{"<unk>", "the", "cat"}));
  EXPECT_EQ(Tokens(m, m.Encode("the dog")), (std::vector<std::string>{"the", "<unk>"}));
}

TEST(BuildLookup, WordTiesBreakLexicographically) {
  const Corpus c{{"b a c"}};
  EXPECT_EQ(BuildLookup(c, Family::kWord, 3, PreTokenizer{}).vocab(),
            (std::vector<std::string>{"<unk>", "a", "b"}));
}

TEST(BuildLookup, WordTooFewTypesIsAnError) {
  EXPECT_THROW(BuildLookup(Corpus{{"a b"}}, Family::kWord, 5, PreTokenizer{}), Error);
}

TEST(BuildLookup, CharacterFamilyIgnoresVocabSize) {
  const TokenizerModel m = BuildLookup(Corpus{{"ab"}}, Family::kCharacter, 100, PreTokenizer{});
  EXPECT_EQ(m.vocab(), (std::vector<std::string>{"<unk>", "a", "b"}));
  EXPECT_EQ(Tokens(m, m.Encode("abc")), (std::vector<std::string>{"a", "b", "<unk>"}));
}

TEST(BuildLookup, MorphemicCountsSegments) {
  const PreTokenizer pre = LexiconPre({{"books", {"book", "s"}}});
  EXPECT_EQ(pre.Count(Corpus{{"books books"}}), (PreTokenCounts{{"book", 2}, {"s", 2}}));
  const TokenizerModel m = BuildLookup(Corpus{{"books books"}}, Family::kMorphemic, 3, pre);
  EXPECT_EQ(m.vocab(), (std::vector<std::string>{"<unk>", "book", "s"}));
  EXPECT_EQ(Tokens(m, m.Encode("books")), (std::vector<std::string>{"book", "s"}));
}

TEST(BuildLookup, MorphemicWithoutSegmenterIsAnError) {
  EXPECT_THROW(BuildLookup(Corpus{{"a b"}}, Family::kMorphemic, 2, PreTokenizer{}), Error);
}

TEST(TrainBpe, VocabTooSmallListsBothSizes) {
  try {
    TrainBpe(Corpus{{"abc"}}, 3, PreTokenizer{});
    FAIL();
  } catch (const Error& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find('3'), std::string::npos);
    EXPECT_NE(what.find('4'), std::string::npos) << what;
  }
}

TEST(TrainBpe, OnlyPairExample) {
  const TokenizerModel m = TrainBpe(Corpus{{"aa"}}, 3, PreTokenizer{});
  EXPECT_EQ(m.vocab(), (std::vector<std::string>{"<unk>", "a", "aa"}));
  EXPECT_EQ(m.merges(), (std::vector<BpeMerge>{{"a", "a"}}));
}

TEST(Encode, BpeReplaysMerges) {
  TokenizerModel::Parts parts;
  parts.family = Family::kBpe;
  parts.vocab = {"<unk>", "a", "b", "ab"};
  parts.merges = {{"a", "b"}};
  parts.requested_vocab_size = 4;
  const TokenizerModel m(parts);
  EXPECT_EQ(Tokens(m, m.Encode("aab")), (std::vector<std::string>{"a", "ab"}));
  EXPECT_EQ(Tokens(m, m.Encode("aac")), (std::vector<std::string>{"a", "a", "<unk>"}));
}

TEST(Encode, UnigramPicksMostProbable) {
  auto model = [](double a, double b, double ab) {
    TokenizerModel::Parts parts;
    parts.family = Family::kUnigram;
    parts.vocab = {"<unk>", "a", "b", "ab"};
    parts.piece_log_probs = {std::log(1e-6), std::log(a), std::log(b), std::log(ab)};
    parts.requested_vocab_size = 4;
    return TokenizerModel(parts);
  };
  const TokenizerModel first = model(0.5, 0.4, 0.1);
  EXPECT_EQ(Tokens(first, first.Encode("ab")), (std::vector<std::string>{"a", "b"}));
  const TokenizerModel second = model(0.4, 0.35, 0.25);
  EXPECT_EQ(Tokens(second, second.Encode("ab")), (std::vector<std::string>{"ab"}));
}

TEST(Encode, SpansFollowWords) {
  const TokenizerModel m = BuildLookup(Corpus{{"ab c"}}, Family::kCharacter, 0, PreTokenizer{});
  const Encoding e = m.Encode("  ab \t c ");
  EXPECT_EQ(e.word_spans, (std::vector<WordSpan>{{0, 2}, {2, 3}}));
  EXPECT_TRUE(m.Encode("").ids.empty());
}

TEST(Model, ValidationRejectsBrokenParts) {
  TokenizerModel::Parts parts;
  parts.family = Family::kWord;
  parts.vocab = {"a", "<unk>"};
  parts.requested_vocab_size = 2;
  EXPECT_THROW(TokenizerModel{parts}, ContractError);
  parts.vocab = {"<unk>", "a", "a"};
  parts.requested_vocab_size = 3;
  EXPECT_THROW(TokenizerModel{parts}, ContractError);
  parts.vocab = {"<unk>", "a"};
  EXPECT_THROW(TokenizerModel{parts}, ContractError);  // size differs from request
  parts.family = Family::kBpe;
  parts.requested_vocab_size = 2;
  parts.merges = {{"a", "b"}};
  EXPECT_THROW(TokenizerModel{parts}, ContractError);  // merge outside vocab
  parts.family = Family::kUnigram;
  parts.merges.clear();
  parts.piece_log_probs = {-1.0, 0.5};
  EXPECT_THROW(TokenizerModel{parts}, ContractError);  // positive log-prob
  parts.piece_log_probs = {-1.0, -INFINITY};
  EXPECT_THROW(TokenizerModel{parts}, ContractError);
}

TEST(Decode, ExamplesAndErrors) {
  const TokenizerModel m = BuildLookup(Corpus{{"the cat"}}, Family::kWord, 3, PreTokenizer{});
  EXPECT_EQ(m.Decode(m.Encode("the cat the")), "the cat the");
  EXPECT_EQ(m.Decode(m.Encode("the dog")), "the <unk>");
  EXPECT_EQ(m.Decode(Encoding{}), "");
  EXPECT_THROW(m.Decode(Encoding{{7}, {{0, 1}}}), ContractError);
  EXPECT_THROW(m.Decode(Encoding{{1, 2}, {{0, 1}}}), ContractError);
}

class TrainedFamilies : public ::testing::TestWithParam<std::pair<Family, bool>> {};

TEST_P(TrainedFamilies, InvariantsOnToyCorpus) {
  const auto [family, with_lexicon] = GetParam();
  const PreTokenizer pre = with_lexicon ? ToyLexiconPre() : PreTokenizer{};
  const std::size_t size = 120;
  const TokenizerModel m = TrainTokenizer(ToyCorpus(), family, size, pre);
  if (family != Family::kCharacter) {
    EXPECT_EQ(m.vocab_size(), size);
  }
  EXPECT_EQ(m.vocab()[0], kUnkToken);

  const Corpus eval = ReadCorpus(DataDir() / "toy" / "eval.txt");
  for (const std::string& line : eval.lines) {
    const Encoding e = m.Encode(line);
    const auto words = SplitWhitespace(line);
    ASSERT_EQ(e.word_spans.size(), words.size());
    for (std::size_t w = 0; w < words.size(); ++w) {
      const WordSpan span = e.word_spans[w];
      // Tokens never cross pre-token boundaries: the span is exactly the
      // concatenation of each pre-token encoded on its own.
      std::vector<TokenId> separate;
      for (const std::string& pt : pre.SplitWord(words[w])) m.EncodePreToken(pt, &separate);
      EXPECT_EQ(std::vector<TokenId>(e.ids.begin() + span.begin, e.ids.begin() + span.end),
                separate);
      std::string joined;
      bool unk = false;
      for (std::size_t i = span.begin; i < span.end; ++i) {
        unk |= e.ids[i] == kUnkId;
        joined += m.TokenOf(e.ids[i]);
      }
      if (!unk) {
        EXPECT_EQ(joined, words[w]);
      }
    }
    if (std::find(e.ids.begin(), e.ids.end(), kUnkId) == e.ids.end()) {
      EXPECT_EQ(m.Decode(e), line);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(
    AllFamilies, TrainedFamilies,
    ::testing::Values(std::pair{Family::kCharacter, false}, std::pair{Family::kWord, false},
                      std::pair{Family::kBpe, false}, std::pair{Family::kUnigram, false},
                      std::pair{Family::kMorphemic, true}, std::pair{Family::kBpe, true},
                      std::pair{Family::kUnigram, true}),
    [](const auto& info) {
      return std::string(FamilyName(info.param.first)) + (info.param.second ? "Lexicon" : "Plain");
    });

TEST(TrainUnigram, ModelProbabilitiesAreNormalized) {
  const TokenizerModel m = TrainUnigram(ToyCorpus(), 100, PreTokenizer{});
  double mass = 0.0;
  for (double lp : m.piece_log_probs()) {
    EXPECT_TRUE(std::isfinite(lp));
    EXPECT_LE(lp, 0.0);
    mass += std::exp(lp);
  }
  EXPECT_LE(mass, 1.0 + 1e-9);
  EXPECT_NEAR(mass, 1.0, 1e-9);
  std::set<std::string> alphabet;
  for (const auto& line : ToyCorpus().lines) {
    for (auto cp : SplitCodePoints(line)) {
      if (cp != " ") alphabet.insert(std::string(cp));
    }
  }
  for (const auto& cp : alphabet) EXPECT_GE(m.IdOf(cp), 1) << cp;
}

TEST(Serialization, RoundTripGivesIdenticalEncodings) {
  TempDir dir;
  for (Family f : {Family::kCharacter, Family::kWord, Family::kBpe, Family::kUnigram}) {
    const TokenizerModel m = TrainTokenizer(ToyCorpus(), f, 150, PreTokenizer{});
    const auto path = dir / (std::string(FamilyName(f)) + ".json");
    SaveModel(m, path);
    const TokenizerModel loaded = LoadModel(path);
    EXPECT_EQ(loaded.vocab(), m.vocab());
    for (const std::string& line : ToyCorpus().lines) ASSERT_EQ(loaded.Encode(line), m.Encode(line));
    SaveModel(loaded, dir / "again.json");
    EXPECT_EQ(ReadFile(dir / "again.json"), ReadFile(path));
  }
}

TEST(Serialization, LexiconPathResolvesAgainstModel) {
  TempDir dir;
  std::filesystem::create_directories(dir / "seg");
  std::filesystem::create_directories(dir / "models");
  WriteFile(dir / "seg" / "lex.tsv", "books\tbook s\n");
  const PreTokenizer pre =
      PreTokenizer::Load(PreTokenizerSpec::Parse("lexicon:" + (dir / "seg" / "lex.tsv").string()));
  const TokenizerModel m = BuildLookup(Corpus{{"books books"}}, Family::kMorphemic, 3, pre);
  SaveModel(m, dir / "models" / "m.json");
  EXPECT_NE(ReadFile(dir / "models" / "m.json").find("../seg/lex.tsv"), std::string::npos);
  const TokenizerModel loaded = LoadModel(dir / "models" / "m.json");
  EXPECT_EQ(loaded.Encode("books"), m.Encode("books"));

  // Editing the lexicon after training breaks the fingerprint.
  WriteFile(dir / "seg" / "lex.tsv", "books\tbo oks\n");
  EXPECT_THROW(LoadModel(dir / "models" / "m.json"), Error);
}

TEST(Serialization, VersionMismatchNamesField) {
  const TokenizerModel m = BuildLookup(Corpus{{"a"}}, Family::kCharacter, 0, PreTokenizer{});
  std::string text = SerializeModel(m);
  const std::string key = "\"version\": 1";
  ASSERT_NE(text.find(key), std::string::npos);
  text.replace(text.find(key), key.size(), "\"version\": 99");
  try {
    DeserializeModel(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(Serialization, CorruptedFileIsAnError) {
  EXPECT_THROW(DeserializeModel("{\"format\": \"morphotok-tokenizer\""), Error);
  EXPECT_THROW(DeserializeModel("[]"), Error);
}

TEST(Training, DeterministicSerialization) {
  for (Family f : {Family::kBpe, Family::kUnigram}) {
    EXPECT_EQ(SerializeModel(TrainTokenizer(ToyCorpus(), f, 140, ToyLexiconPre())),
              SerializeModel(TrainTokenizer(ToyCorpus(), f, 140, ToyLexiconPre())));
  }
}

}  // namespace
}  // namespace morphotok
