// morphotok: corpus preparation, segmentation, tokenizer training and
// evaluation from one binary. Run `morphotok --help` for the command list.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "morphotok/analysis_table.h"
#include "morphotok/corpus.h"
#include "morphotok/error.h"
#include "morphotok/intrinsic.h"
#include "morphotok/morphscore.h"
#include "morphotok/pipeline.h"
#include "morphotok/segment.h"
#include "morphotok/stats.h"
#include "morphotok/tokenizer.h"

namespace {

using namespace morphotok;
using Json = nlohmann::ordered_json;

// Exit status for bad usage, bad manifests and missing inputs.
constexpr int kUsageError = 2;

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw Error("cannot open '" + path + "' for writing");
    path_ = path;
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void Close() {
    stream().flush();
    if (!stream()) throw Error("write failed for '" + path_ + "'");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::string path_ = "<stdout>";
};

void WriteAll(const std::string& path, const std::string& text) {
  Output out(path);
  out.stream() << text;
  out.Close();
}

Corpus ReadNormalized(const std::string& path, Normalization norm) {
  Corpus c = ReadCorpus(path);
  for (std::string& line : c.lines) line = Normalize(line, norm);
  return c;
}

Segmenter LoadSegmenter(const std::string& lexicon, const std::string& mdl,
                        Normalization norm) {
  if (!lexicon.empty()) {
    return Segmenter(
        std::make_shared<const SegmentationLexicon>(LoadLexicon(lexicon,
            SegmenterSource::kExternalAnalyzer, norm)));
  }
  return Segmenter(std::make_shared<const MdlModel>(LoadMdlModel(mdl)));
}

struct CorpusArgs {
  std::vector<std::string> inputs;
  std::string out = "-";
  std::string norm = "nfc";
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

struct SegmentArgs {
  std::string in, out = "-", lexicon, mdl, norm = "nfc";
  std::string marker = "@@", placement = "suffix";
  int epochs = 5;
  double corpus_weight = 1.0;
  std::uint64_t seed = 0;
};

struct TokArgs {
  std::string family, pre = "none", in, out = "-", model, norm = "nfc";
  std::size_t vocab_size = 0;
};

struct MorphArgs {
  std::string gold, model, out = "-", per_word, unit = "codepoint";
  std::string in, kept, dropped;
};

struct IntrinsicArgs {
  std::string model, in, out = "-";
  double alpha = kDefaultRenyiAlpha;
};

struct StatsArgs {
  std::string table, method = "pearson", x, y, response, terms, reduced, full, a, b;
  std::string out = "-";
  bool interaction = false;
};

void RunCorpusDedup(const CorpusArgs& a) {
  std::vector<std::filesystem::path> sources(a.inputs.begin(), a.inputs.end());
  Output out(a.out);
  const DedupSummary s = DedupToStream(sources, ParseNormalization(a.norm), out.stream());
  out.Close();
  spdlog::info("read {} lines, wrote {}, dropped {} blank and {} duplicate",
               s.lines_read, s.lines_written, s.blank_dropped, s.duplicates_dropped);
}

void RunCorpusSample(const CorpusArgs& a) {
  Output out(a.out);
  const std::size_t written = SampleToStream(a.inputs.at(0), a.n, a.seed, out.stream());
  out.Close();
  spdlog::info("sampled {} lines", written);
}

void RunCorpusStats(const CorpusArgs& a) {
  const CorpusStats s = ComputeCorpusStats(std::filesystem::path(a.inputs.at(0)));
  Json j;
  j["sentences"] = s.sentences;
  j["word_tokens"] = s.word_tokens;
  j["word_types"] = s.word_types;
  j["type_token_ratio"] =
      s.type_token_ratio ? Json(*s.type_token_ratio) : Json(nullptr);
  WriteAll(a.out, j.dump(1) + "\n");
}

void RunTrainMdl(const SegmentArgs& a) {
  const Corpus corpus = ReadNormalized(a.in, ParseNormalization(a.norm));
  MdlConfig config;
  config.epochs = a.epochs;
  config.corpus_weight = a.corpus_weight;
  const MdlTrainingResult r = TrainMdl(CountWords(corpus), config, a.seed);
  SaveMdlModel(r.model, a.out);
  spdlog::info("cost {:.6f} -> {:.6f}; {} morph types", r.initial_cost,
               r.final_cost, r.model.morph_counts().size());
}

void RunSegmentApply(const SegmentArgs& a) {
  const Normalization norm = ParseNormalization(a.norm);
  const Segmenter seg = LoadSegmenter(a.lexicon, a.mdl, norm);
  const MarkerPolicy policy{a.marker, ParseMarkerPlacement(a.placement)};
  const Corpus corpus = ReadNormalized(a.in, norm);
  SegmentStats stats;
  Output out(a.out);
  for (const std::string& line : corpus.lines) {
    out.stream() << SegmentLine(line, seg, policy, &stats) << '\n';
  }
  out.Close();
  if (seg.lexicon()) {
    spdlog::info("{} lookups, {} misses", stats.lookups, stats.misses);
  }
}

void RunTokTrain(const TokArgs& a) {
  const Corpus corpus = ReadNormalized(a.in, ParseNormalization(a.norm));
  const PreTokenizer pre = PreTokenizer::Load(PreTokenizerSpec::Parse(a.pre));
  const TokenizerModel model =
      TrainTokenizer(corpus, ParseFamily(a.family), a.vocab_size, pre);
  SaveModel(model, a.out);
  spdlog::info("{} model with {} tokens written to {}", FamilyName(model.family()),
               model.vocab_size(), a.out);
}

void RunTokEncode(const TokArgs& a) {
  const TokenizerModel model = LoadModel(a.model);
  const Corpus corpus = ReadNormalized(a.in, ParseNormalization(a.norm));
  Output out(a.out);
  for (const std::string& line : corpus.lines) {
    const Encoding enc = model.Encode(line);
    Json spans = Json::array();
    for (const WordSpan& s : enc.word_spans) spans.push_back({s.begin, s.end});
    Json j;
    j["ids"] = enc.ids;
    j["spans"] = std::move(spans);
    out.stream() << j.dump() << '\n';
  }
  out.Close();
}

void RunTokDecode(const TokArgs& a) {
  const TokenizerModel model = LoadModel(a.model);
  std::ifstream in(a.in, std::ios::binary);
  if (!in) throw Error("cannot open '" + a.in + "' for reading");
  Output out(a.out);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    Encoding enc;
    try {
      const Json j = Json::parse(line);
      enc.ids = j.at("ids").get<std::vector<TokenId>>();
      for (const Json& s : j.at("spans")) {
        enc.word_spans.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(a.in, lineno, std::string("bad encoding record: ") + e.what());
    }
    out.stream() << model.Decode(enc) << '\n';
  }
  out.Close();
}

void RunMorphEval(const MorphArgs& a) {
  const TokenizerModel model = LoadModel(a.model);
  const std::vector<GoldEntry> gold = LoadGoldset(a.gold);
  const MorphReport report = EvaluateMorphology(gold, model, ParseBoundaryUnit(a.unit));
  WriteAll(a.out, MorphReportJson(report));
  if (!a.per_word.empty()) WriteAll(a.per_word, MorphPerWordJsonl(report));
}

void RunMorphFilter(const MorphArgs& a) {
  const GoldFilterResult r = FilterGoldset(LoadRawGoldset(a.in));
  WriteGoldset(r.kept, a.kept);
  WriteDropped(r.dropped, a.dropped);
  spdlog::info("kept {}, dropped {}", r.kept.size(), r.dropped.size());
}

void RunIntrinsic(const IntrinsicArgs& a) {
  const TokenizerModel model = LoadModel(a.model);
  const Corpus corpus = ReadNormalized(a.in, Normalization::kNfc);
  WriteAll(a.out, IntrinsicReportJson(ComputeIntrinsic(model, corpus, a.alpha)));
}

void RunStatsCorr(const StatsArgs& a) {
  const AnalysisTable t = AnalysisTable::Read(a.table);
  const std::vector<double> x = t.Numbers(a.x);
  const std::vector<double> y = t.Numbers(a.y);
  if (a.method != "pearson" && a.method != "spearman") {
    throw Error("unknown correlation method '" + a.method + "'");
  }
  WriteAll(a.out, CorrelationJson(a.method == "pearson" ? Pearson(x, y)
                                                        : Spearman(x, y)));
}

void RunStatsOls(const StatsArgs& a) {
  const AnalysisTable t = AnalysisTable::Read(a.table);
  WriteAll(a.out, OlsJson(OlsFit(t, a.response, ParseTerms(a.terms))));
}

void RunStatsNested(const StatsArgs& a) {
  const AnalysisTable t = AnalysisTable::Read(a.table);
  WriteAll(a.out, FTestJson(NestedF(t, a.response, ParseTerms(a.reduced),
                                    ParseTerms(a.full))));
}

void RunStatsAnova(const StatsArgs& a) {
  const AnalysisTable t = AnalysisTable::Read(a.table);
  WriteAll(a.out, AnovaJson(AnovaTwoWay(t, a.response, a.a, a.b, a.interaction)));
}

int RunManifest(const std::string& path) {
  ExperimentManifest manifest;
  try {
    manifest = LoadManifest(path);
  } catch (const ManifestError& e) {
    spdlog::error("{}", e.what());
    return kUsageError;
  }
  const RunResult r = RunExperiment(manifest);
  spdlog::info("{} of {} entries succeeded; table at {}",
               r.entries - r.failed.size(), r.entries, r.csv.string());
  for (const std::string& id : r.failed) spdlog::error("failed: {}", id);
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("morphotok"));
  spdlog::set_pattern("%^[%l]%$ %v");

  CLI::App app{"Tokenizer training and morphological evaluation toolkit",
               "morphotok"};
  app.set_version_flag("--version", MORPHOTOK_VERSION);
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  int exit_code = 0;
  std::function<void()> action;

  // corpus
  CorpusArgs corpus_args;
  CLI::App* corpus = app.add_subcommand("corpus", "Deduplicate, sample and describe corpora");
  corpus->require_subcommand(1);
  CLI::App* dedup = corpus->add_subcommand("dedup", "Normalize and drop blank or repeated lines");
  dedup->add_option("inputs,--in", corpus_args.inputs, "Input files, read in order")->required();
  dedup->add_option("--out", corpus_args.out, "Output file (- for stdout)");
  dedup->add_option("--norm", corpus_args.norm, "nfc or none");
  dedup->callback([&] { action = [&] { RunCorpusDedup(corpus_args); }; });
  CLI::App* sample = corpus->add_subcommand("sample", "Order-preserving sample of N lines");
  sample->add_option("input,--in", corpus_args.inputs, "Input file")->required()->expected(1);
  sample->add_option("--n", corpus_args.n, "Lines to keep")->required();
  sample->add_option("--seed", corpus_args.seed, "Random seed");
  sample->add_option("--out", corpus_args.out, "Output file (- for stdout)");
  sample->callback([&] { action = [&] { RunCorpusSample(corpus_args); }; });
  CLI::App* cstats = corpus->add_subcommand("stats", "Sentence, token and type counts");
  cstats->add_option("input,--in", corpus_args.inputs, "Input file")->required()->expected(1);
  cstats->add_option("--out", corpus_args.out, "JSON output (- for stdout)");
  cstats->callback([&] { action = [&] { RunCorpusStats(corpus_args); }; });

  // segment
  SegmentArgs seg_args;
  CLI::App* segment = app.add_subcommand("segment", "Morphological segmenters");
  segment->require_subcommand(1);
  CLI::App* train_mdl = segment->add_subcommand("train-mdl", "Train an MDL segmenter");
  train_mdl->add_option("--in", seg_args.in, "Training corpus")->required();
  train_mdl->add_option("--out", seg_args.out, "Model file")->required();
  train_mdl->add_option("--epochs", seg_args.epochs, "Passes over the word list");
  train_mdl->add_option("--corpus-weight", seg_args.corpus_weight,
                        "Weight of the corpus code length");
  train_mdl->add_option("--seed", seg_args.seed, "Random seed");
  train_mdl->add_option("--norm", seg_args.norm, "nfc or none");
  train_mdl->callback([&] { action = [&] { RunTrainMdl(seg_args); }; });
  CLI::App* apply = segment->add_subcommand("apply", "Segment every word of a corpus");
  apply->add_option("--in", seg_args.in, "Input corpus")->required();
  apply->add_option("--out", seg_args.out, "Output file (- for stdout)");
  auto* lex_opt = apply->add_option("--lexicon", seg_args.lexicon, "Segmentation lexicon TSV");
  auto* mdl_opt = apply->add_option("--mdl", seg_args.mdl, "MDL model file");
  lex_opt->excludes(mdl_opt);
  apply->add_option("--marker", seg_args.marker, "Marker string");
  apply->add_option("--placement", seg_args.placement, "suffix, prefix or none");
  apply->add_option("--norm", seg_args.norm, "nfc or none");
  apply->callback([&] {
    if (seg_args.lexicon.empty() && seg_args.mdl.empty()) {
      throw CLI::RequiredError("--lexicon or --mdl");
    }
    action = [&] { RunSegmentApply(seg_args); };
  });

  // tok
  TokArgs tok_args;
  CLI::App* tok = app.add_subcommand("tok", "Train and apply tokenizers");
  tok->require_subcommand(1);
  CLI::App* train = tok->add_subcommand("train", "Train a tokenizer");
  train->add_option("--family", tok_args.family,
                    "character, word, morphemic, bpe or unigram")->required();
  train->add_option("--vocab-size", tok_args.vocab_size,
                    "Vocabulary size including specials")->required();
  train->add_option("--pre", tok_args.pre, "none, lexicon:PATH or mdl:PATH");
  train->add_option("--in", tok_args.in, "Training corpus")->required();
  train->add_option("--out", tok_args.out, "Model file")->required();
  train->add_option("--norm", tok_args.norm, "nfc or none");
  train->callback([&] { action = [&] { RunTokTrain(tok_args); }; });
  CLI::App* encode = tok->add_subcommand("encode", "Encode a corpus to JSONL ids");
  encode->add_option("--model", tok_args.model, "Model file")->required();
  encode->add_option("--in", tok_args.in, "Input corpus")->required();
  encode->add_option("--out", tok_args.out, "JSONL output (- for stdout)");
  encode->add_option("--norm", tok_args.norm, "nfc or none");
  encode->callback([&] { action = [&] { RunTokEncode(tok_args); }; });
  CLI::App* decode = tok->add_subcommand("decode", "Decode JSONL ids to text");
  decode->add_option("--model", tok_args.model, "Model file")->required();
  decode->add_option("--in", tok_args.in, "JSONL from tok encode")->required();
  decode->add_option("--out", tok_args.out, "Output file (- for stdout)");
  decode->callback([&] { action = [&] { RunTokDecode(tok_args); }; });

  // morph
  MorphArgs morph_args;
  CLI::App* morph = app.add_subcommand("morph", "Gold sets and boundary alignment");
  morph->require_subcommand(1);
  CLI::App* eval = morph->add_subcommand("eval", "Score a tokenizer against a gold set");
  eval->add_option("--gold", morph_args.gold, "Gold TSV")->required();
  eval->add_option("--model", morph_args.model, "Model file")->required();
  eval->add_option("--out", morph_args.out, "JSON report (- for stdout)");
  eval->add_option("--per-word", morph_args.per_word, "Per-word JSONL output");
  eval->add_option("--unit", morph_args.unit, "codepoint or grapheme");
  eval->callback([&] { action = [&] { RunMorphEval(morph_args); }; });
  CLI::App* filter = morph->add_subcommand("filter", "Drop entries that do not concatenate");
  filter->add_option("--in", morph_args.in, "Raw gold TSV")->required();
  filter->add_option("--kept", morph_args.kept, "Output for valid entries")->required();
  filter->add_option("--dropped", morph_args.dropped,
                     "Output for dropped entries with reasons")->required();
  filter->callback([&] { action = [&] { RunMorphFilter(morph_args); }; });

  // intrinsic
  IntrinsicArgs intr_args;
  CLI::App* intrinsic = app.add_subcommand("intrinsic", "Corpus token count and Renyi efficiency");
  intrinsic->add_option("--model", intr_args.model, "Model file")->required();
  intrinsic->add_option("--in", intr_args.in, "Evaluation corpus")->required();
  intrinsic->add_option("--alpha", intr_args.alpha, "Renyi order");
  intrinsic->add_option("--out", intr_args.out, "JSON report (- for stdout)");
  intrinsic->callback([&] { action = [&] { RunIntrinsic(intr_args); }; });

  // stats
  StatsArgs st;
  CLI::App* stats = app.add_subcommand("stats", "Correlation, regression and ANOVA");
  stats->require_subcommand(1);
  CLI::App* corr = stats->add_subcommand("corr", "Pearson or Spearman correlation");
  corr->add_option("--method", st.method, "pearson or spearman");
  corr->add_option("--x", st.x, "Column")->required();
  corr->add_option("--y", st.y, "Column")->required();
  corr->add_option("--out", st.out, "JSON output (- for stdout)");
  corr->add_option("table", st.table, "CSV table")->required();
  corr->callback([&] { action = [&] { RunStatsCorr(st); }; });
  CLI::App* ols = stats->add_subcommand("ols", "Least squares with dummy coding");
  ols->add_option("--response", st.response, "Column")->required();
  ols->add_option("--terms", st.terms, "Comma-separated: col, C(col), C(a):C(b)")->required();
  ols->add_option("--out", st.out, "JSON output (- for stdout)");
  ols->add_option("table", st.table, "CSV table")->required();
  ols->callback([&] { action = [&] { RunStatsOls(st); }; });
  CLI::App* nested = stats->add_subcommand("nested", "F test between nested models");
  nested->add_option("--response", st.response, "Column")->required();
  nested->add_option("--reduced", st.reduced, "Terms of the reduced model")->required();
  nested->add_option("--full", st.full, "Terms of the full model")->required();
  nested->add_option("--out", st.out, "JSON output (- for stdout)");
  nested->add_option("table", st.table, "CSV table")->required();
  nested->callback([&] { action = [&] { RunStatsNested(st); }; });
  CLI::App* anova = stats->add_subcommand("anova", "Type-II two-way ANOVA");
  anova->add_option("--response", st.response, "Column")->required();
  anova->add_option("--a", st.a, "First factor column")->required();
  anova->add_option("--b", st.b, "Second factor column")->required();
  anova->add_flag("--interaction", st.interaction, "Include the interaction term");
  anova->add_option("--out", st.out, "JSON output (- for stdout)");
  anova->add_option("table", st.table, "CSV table")->required();
  anova->callback([&] { action = [&] { RunStatsAnova(st); }; });

  // run
  std::string manifest;
  CLI::App* run = app.add_subcommand("run", "Run an experiment manifest");
  run->add_option("manifest", manifest, "Manifest JSON")->required();
  run->callback([&] { action = [&] { exit_code = RunManifest(manifest); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }
  if (quiet) {
    for (auto& sink : spdlog::default_logger()->sinks()) {
      sink->set_level(spdlog::level::warn);
    }
  }

  try {
    action();
  } catch (const ParseError& e) {
    spdlog::error("{}", e.what());
    return kUsageError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return exit_code;
}
