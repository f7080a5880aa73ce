#include "morphotok/intrinsic.h"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "morphotok/error.h"

namespace morphotok {
namespace {

class KahanSum {
 public:
  void Add(double x) {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

std::optional<double> Efficiency(double entropy, std::size_t vocab) {
  if (vocab < 2) return std::nullopt;
  return entropy / std::log(static_cast<double>(vocab));
}

}  // namespace

std::uint64_t CountCtc(const TokenizerModel& model, const Corpus& corpus) {
  std::uint64_t total = 0;
  for (const std::string& line : corpus.lines) {
    total += model.Encode(line).ids.size();
  }
  return total;
}

std::vector<double> TokenDistribution::Probabilities() const {
  std::vector<double> p;
  p.reserve(counts.size());
  for (const auto& [id, c] : counts) {
    p.push_back(static_cast<double>(c) / static_cast<double>(total));
  }
  return p;
}

TokenDistribution ComputeTokenDistribution(const TokenizerModel& model,
                                           const Corpus& corpus) {
  TokenDistribution dist;
  dist.model_vocab_size = model.vocab_size();
  for (const std::string& line : corpus.lines) {
    for (TokenId id : model.Encode(line).ids) {
      ++dist.counts[id];
      ++dist.total;
    }
  }
  return dist;
}

double RenyiEntropy(std::span<const double> probs, double alpha) {
  if (!(alpha > 0.0)) {
    throw ContractError("Renyi order must be positive, got " +
                        std::to_string(alpha));
  }
  if (probs.empty()) throw ContractError("Renyi entropy of an empty distribution");
  KahanSum sum;
  if (alpha == 1.0) {
    for (double p : probs) {
      if (p > 0.0) sum.Add(-p * std::log(p));
    }
    return sum.value();
  }
  // sum p^alpha = 1 + sum p * (p^(alpha-1) - 1), accurate near alpha = 1.
  for (double p : probs) {
    if (p > 0.0) sum.Add(p * std::expm1((alpha - 1.0) * std::log(p)));
  }
  return std::log1p(sum.value()) / (1.0 - alpha);
}

IntrinsicReport ComputeIntrinsic(const TokenDistribution& dist, double alpha) {
  IntrinsicReport r;
  r.ctc = dist.total;
  r.alpha = alpha;
  r.model_vocab = dist.model_vocab_size;
  r.observed_vocab = dist.observed_vocab_size();
  if (dist.total == 0) {
    throw ContractError("intrinsic metrics need a non-empty evaluation corpus");
  }
  const std::vector<double> p = dist.Probabilities();
  r.renyi_entropy = std::max(0.0, RenyiEntropy(p, alpha));
  r.renyi_efficiency_model = Efficiency(r.renyi_entropy, r.model_vocab);
  r.renyi_efficiency_observed = Efficiency(r.renyi_entropy, r.observed_vocab);
  return r;
}

IntrinsicReport ComputeIntrinsic(const TokenizerModel& model,
                                 const Corpus& corpus, double alpha) {
  return ComputeIntrinsic(ComputeTokenDistribution(model, corpus), alpha);
}

std::string IntrinsicReportJson(const IntrinsicReport& r) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::ordered_json {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json j;
  j["ctc"] = r.ctc;
  j["alpha"] = r.alpha;
  j["renyi_entropy"] = r.renyi_entropy;
  j["renyi_efficiency_model"] = opt(r.renyi_efficiency_model);
  j["renyi_efficiency_observed"] = opt(r.renyi_efficiency_observed);
  j["observed_vocab"] = r.observed_vocab;
  j["model_vocab"] = r.model_vocab;
  return j.dump(1) + "\n";
}

}  // namespace morphotok
