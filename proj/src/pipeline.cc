#include "morphotok/pipeline.h"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/spdlog.h>

#include "morphotok/analysis_table.h"
#include "morphotok/corpus.h"
#include "morphotok/intrinsic.h"

namespace morphotok {
namespace {

using Json = nlohmann::json;

const std::set<std::string> kManifestFields = {
    "corpus", "normalization", "sample",      "seed",      "grid",
    "gold",   "eval_corpus",   "alpha",       "output_dir", "mdl",
    "boundary_unit"};

std::string Format(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string Format(const std::optional<double>& v) {
  return v ? Format(*v) : std::string();
}

const Json& Need(const Json& j, const std::string& field) {
  auto it = j.find(field);
  if (it == j.end()) throw ManifestError(field, "is required");
  return *it;
}

template <typename T>
T Get(const Json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ManifestError(field, "has the wrong type");
  }
}

std::filesystem::path ExistingFile(const Json& j, const std::string& field,
                                   const std::filesystem::path& base) {
  const std::filesystem::path p = base / Get<std::string>(j, field);
  if (!std::filesystem::is_regular_file(p)) {
    throw ManifestError(field, "file not found: " + p.string());
  }
  return p;
}

std::vector<std::filesystem::path> ExistingFiles(const Json& j,
                                                 const std::string& field,
                                                 const std::filesystem::path& base) {
  if (!j.is_array() || j.empty()) {
    throw ManifestError(field, "expected a non-empty array of paths");
  }
  std::vector<std::filesystem::path> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(ExistingFile(j[i], field + "[" + std::to_string(i) + "]", base));
  }
  return out;
}

std::string Slug(const std::string& pre) {
  const PreTokenizerSpec spec =
      pre == "mdl" ? PreTokenizerSpec{PreTokenizerSpec::Kind::kMdl, "", "", {}}
                   : PreTokenizerSpec::Parse(pre);
  if (spec.kind == PreTokenizerSpec::Kind::kNone) return "none";
  std::string out(PreTokenizerKindName(spec.kind));
  if (!spec.path.empty()) {
    out += '_';
    for (char c : std::filesystem::path(spec.path).stem().string()) {
      const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '-' || c == '_';
      out += ok ? c : '_';
    }
  }
  return out;
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

// Routes the default logger to `file` as well as the console while alive.
class EntryLog {
 public:
  explicit EntryLog(const std::filesystem::path& file)
      : previous_(spdlog::default_logger()) {
    auto sink = std::make_shared<spdlog::sinks::basic_file_sink_mt>(file.string(),
                                                                   true);
    sink->set_pattern("[%l] %v");
    std::vector<spdlog::sink_ptr> sinks = previous_->sinks();
    sinks.push_back(sink);
    logger_ = std::make_shared<spdlog::logger>("entry", sinks.begin(), sinks.end());
    logger_->set_level(spdlog::level::info);
    spdlog::set_default_logger(logger_);
  }
  ~EntryLog() {
    logger_->flush();
    spdlog::set_default_logger(previous_);
  }
  EntryLog(const EntryLog&) = delete;
  EntryLog& operator=(const EntryLog&) = delete;

 private:
  std::shared_ptr<spdlog::logger> previous_;
  std::shared_ptr<spdlog::logger> logger_;
};

}  // namespace

std::string GridEntry::Id() const {
  return std::string(FamilyName(family)) + "-" + Slug(pre_tokenizer) + "-" +
         std::to_string(vocab_size);
}

std::vector<GridEntry> ExperimentManifest::Grid() const {
  std::vector<GridEntry> grid;
  for (Family f : families) {
    for (const std::string& pre : pre_tokenizers) {
      for (std::size_t v : vocab_sizes) grid.push_back({f, pre, v});
    }
  }
  return grid;
}

const std::vector<std::string>& AnalysisColumns() {
  static const std::vector<std::string> columns = {
      "config_id",      "tokenizer",       "pre_tokenizer",
      "vocab_size",     "model_vocab",     "status",
      "morph_recall",   "morph_precision", "morph_f1",
      "micro_recall",   "micro_precision", "micro_f1",
      "morph_evaluated", "ctc",            "renyi_entropy",
      "renyi_efficiency_model",            "renyi_efficiency_observed"};
  return columns;
}

ExperimentManifest ParseManifest(std::string_view text,
                                 const std::filesystem::path& base) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ManifestError("<root>", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ManifestError("<root>", "expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kManifestFields.count(key)) throw ManifestError(key, "unknown field");
  }

  ExperimentManifest m;
  m.corpus = ExistingFiles(Need(j, "corpus"), "corpus", base);
  if (j.contains("normalization")) {
    try {
      m.normalization =
          ParseNormalization(Get<std::string>(j["normalization"], "normalization"));
    } catch (const ManifestError&) {
      throw;
    } catch (const Error& e) {
      throw ManifestError("normalization", e.what());
    }
  }
  if (j.contains("sample") && !j["sample"].is_null()) {
    const auto n = Get<std::int64_t>(j["sample"], "sample");
    if (n <= 0) throw ManifestError("sample", "must be a positive line count");
    m.sample = static_cast<std::size_t>(n);
  }
  m.seed = Get<std::uint64_t>(Need(j, "seed"), "seed");

  const Json& grid = Need(j, "grid");
  if (!grid.is_object()) throw ManifestError("grid", "expected an object");
  const Json& families = Need(grid, "families");
  if (!families.is_array() || families.empty()) {
    throw ManifestError("grid.families", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < families.size(); ++i) {
    const std::string field = "grid.families[" + std::to_string(i) + "]";
    try {
      m.families.push_back(ParseFamily(Get<std::string>(families[i], field)));
    } catch (const ManifestError&) {
      throw;
    } catch (const Error& e) {
      throw ManifestError(field, e.what());
    }
  }
  const Json& pres = grid.contains("pre_tokenizers") ? grid["pre_tokenizers"]
                                                     : Json::array({"none"});
  if (!pres.is_array() || pres.empty()) {
    throw ManifestError("grid.pre_tokenizers", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < pres.size(); ++i) {
    const std::string field = "grid.pre_tokenizers[" + std::to_string(i) + "]";
    const std::string pre = Get<std::string>(pres[i], field);
    if (pre == "mdl" || pre == "none") {
      m.pre_tokenizers.push_back(pre);
      continue;
    }
    PreTokenizerSpec spec;
    try {
      spec = PreTokenizerSpec::Parse(pre);
    } catch (const Error& e) {
      throw ManifestError(field, e.what());
    }
    const std::filesystem::path p = base / spec.path;
    if (!std::filesystem::is_regular_file(p)) {
      throw ManifestError(field, "file not found: " + p.string());
    }
    spec.path = p.string();
    m.pre_tokenizers.push_back(spec.ToString());
  }
  const Json& sizes = Need(grid, "vocab_sizes");
  if (!sizes.is_array() || sizes.empty()) {
    throw ManifestError("grid.vocab_sizes", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const std::string field = "grid.vocab_sizes[" + std::to_string(i) + "]";
    const auto v = Get<std::int64_t>(sizes[i], field);
    if (v < 2) throw ManifestError(field, "vocab size must be at least 2");
    m.vocab_sizes.push_back(static_cast<std::size_t>(v));
  }
  std::set<std::string> ids;
  for (const GridEntry& e : m.Grid()) {
    if (!ids.insert(e.Id()).second) {
      throw ManifestError("grid", "duplicate grid entry " + e.Id());
    }
  }

  m.gold = ExistingFiles(Need(j, "gold"), "gold", base);
  m.eval_corpus = ExistingFile(Need(j, "eval_corpus"), "eval_corpus", base);
  if (j.contains("alpha")) {
    m.alpha = Get<double>(j["alpha"], "alpha");
    if (!(m.alpha > 0.0)) throw ManifestError("alpha", "must be positive");
  }
  m.output_dir = base / Get<std::string>(Need(j, "output_dir"), "output_dir");
  if (j.contains("mdl")) {
    const Json& mdl = j["mdl"];
    if (!mdl.is_object()) throw ManifestError("mdl", "expected an object");
    for (const auto& [key, value] : mdl.items()) {
      if (key == "epochs") {
        m.mdl.epochs = Get<int>(value, "mdl.epochs");
        if (m.mdl.epochs < 1) throw ManifestError("mdl.epochs", "must be >= 1");
      } else if (key == "corpus_weight") {
        m.mdl.corpus_weight = Get<double>(value, "mdl.corpus_weight");
        if (!(m.mdl.corpus_weight > 0.0)) {
          throw ManifestError("mdl.corpus_weight", "must be positive");
        }
      } else {
        throw ManifestError("mdl." + key, "unknown field");
      }
    }
  }
  if (j.contains("boundary_unit")) {
    try {
      m.boundary_unit =
          ParseBoundaryUnit(Get<std::string>(j["boundary_unit"], "boundary_unit"));
    } catch (const ManifestError&) {
      throw;
    } catch (const Error& e) {
      throw ManifestError("boundary_unit", e.what());
    }
  }
  return m;
}

ExperimentManifest LoadManifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError("<file>", "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseManifest(buffer.str(), path.parent_path());
}

RunResult RunExperiment(const ExperimentManifest& m) {
  namespace fs = std::filesystem;
  const fs::path models = m.output_dir / "models";
  const fs::path reports = m.output_dir / "reports";
  const fs::path logs = m.output_dir / "logs";
  const fs::path segmenters = m.output_dir / "segmenters";

  // Every input is read before anything is written.
  Corpus corpus = IngestDedup(m.corpus, m.normalization);
  if (m.sample) corpus = Sample(corpus, *m.sample, m.seed);
  std::vector<GoldEntry> gold;
  for (const fs::path& g : m.gold) {
    std::vector<GoldEntry> part = LoadGoldset(g, m.normalization);
    std::move(part.begin(), part.end(), std::back_inserter(gold));
  }
  Corpus eval = ReadCorpus(m.eval_corpus);
  for (std::string& line : eval.lines) line = Normalize(line, m.normalization);

  for (const fs::path& d : {models, reports, logs, segmenters}) {
    fs::create_directories(d);
  }
  spdlog::info("corpus: {} lines after dedup{}", corpus.line_count(),
               m.sample ? " and sampling" : "");

  const bool wants_mdl =
      std::find(m.pre_tokenizers.begin(), m.pre_tokenizers.end(), "mdl") !=
      m.pre_tokenizers.end();
  const fs::path mdl_path = segmenters / "mdl.json";
  if (wants_mdl) {
    const MdlTrainingResult trained = TrainMdl(CountWords(corpus), m.mdl, m.seed);
    SaveMdlModel(trained.model, mdl_path);
    spdlog::info("mdl segmenter: cost {:.6f} -> {:.6f}, {} morphs",
                 trained.initial_cost, trained.final_cost,
                 trained.model.morph_counts().size());
  }

  RunResult result;
  AnalysisTable table(AnalysisColumns());
  const std::vector<GridEntry> grid = m.Grid();
  result.entries = grid.size();
  for (const GridEntry& entry : grid) {
    const std::string id = entry.Id();
    std::vector<std::string> row = {id,
                                    std::string(FamilyName(entry.family)),
                                    entry.pre_tokenizer,
                                    std::to_string(entry.vocab_size)};
    try {
      EntryLog log(logs / (id + ".log"));
      spdlog::info("entry {}", id);
      PreTokenizerSpec spec = entry.pre_tokenizer == "mdl"
                                  ? PreTokenizerSpec::Parse("mdl:" + mdl_path.string())
                                  : PreTokenizerSpec::Parse(entry.pre_tokenizer);
      const PreTokenizer pre = PreTokenizer::Load(std::move(spec));
      const TokenizerModel model =
          TrainTokenizer(corpus, entry.family, entry.vocab_size, pre);
      const fs::path model_path = models / (id + ".json");
      SaveModel(model, model_path);
      spdlog::info("model: {} tokens -> {}", model.vocab_size(),
                   model_path.filename().string());

      const MorphReport morph = EvaluateMorphology(gold, model, m.boundary_unit);
      WriteText(reports / (id + ".morph.json"), MorphReportJson(morph));
      const IntrinsicReport intr = ComputeIntrinsic(model, eval, m.alpha);
      WriteText(reports / (id + ".intrinsic.json"), IntrinsicReportJson(intr));
      spdlog::info("morph: evaluated {}, macro f1 {}", morph.evaluated,
                   Format(morph.macro.f1));
      spdlog::info("intrinsic: ctc {}, renyi {}", intr.ctc,
                   Format(intr.renyi_entropy));

      row.insert(row.end(),
                 {std::to_string(model.vocab_size()), "ok",
                  Format(morph.macro.recall), Format(morph.macro.precision),
                  Format(morph.macro.f1), Format(morph.micro.recall),
                  Format(morph.micro.precision), Format(morph.micro.f1),
                  std::to_string(morph.evaluated), std::to_string(intr.ctc),
                  Format(intr.renyi_entropy), Format(intr.renyi_efficiency_model),
                  Format(intr.renyi_efficiency_observed)});
    } catch (const std::exception& e) {
      spdlog::error("entry {} failed: {}", id, e.what());
      {
        std::ofstream out(logs / (id + ".log"), std::ios::app);
        out << "[error] " << e.what() << '\n';
      }
      result.failed.push_back(id);
      row.resize(4);
      row.push_back("");
      row.push_back("failed");
      row.resize(AnalysisColumns().size());
    }
    table.AddRow(std::move(row));
  }

  result.csv = m.output_dir / "analysis.csv";
  const fs::path tmp = m.output_dir / "analysis.csv.tmp";
  WriteText(tmp, table.ToCsv());
  fs::rename(tmp, result.csv);
  result.exit_code = result.failed.empty() ? 0 : 1;
  return result;
}

}  // namespace morphotok
