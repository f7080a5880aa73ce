#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "morphotok/corpus.h"
#include "morphotok/tokenizer.h"

namespace morphotok {

inline constexpr double kDefaultRenyiAlpha = 2.5;

// Total tokens emitted by encoding every line.
std::uint64_t CountCtc(const TokenizerModel& model, const Corpus& corpus);

struct TokenDistribution {
  std::map<TokenId, std::uint64_t> counts;
  std::uint64_t total = 0;
  std::size_t model_vocab_size = 0;

  std::size_t observed_vocab_size() const { return counts.size(); }
  std::vector<double> Probabilities() const;
};

TokenDistribution ComputeTokenDistribution(const TokenizerModel& model,
                                           const Corpus& corpus);

// Entropy of order `alpha` in nats; alpha == 1 is the Shannon entropy.
// `probs` must sum to one. Throws ContractError for alpha <= 0 or an empty
// distribution.
double RenyiEntropy(std::span<const double> probs, double alpha);

struct IntrinsicReport {
  std::uint64_t ctc = 0;
  double alpha = kDefaultRenyiAlpha;
  double renyi_entropy = 0.0;
  // Entropy over ln(vocab size); empty when the vocab has one entry.
  std::optional<double> renyi_efficiency_model;
  std::optional<double> renyi_efficiency_observed;
  std::size_t observed_vocab = 0;
  std::size_t model_vocab = 0;
};

IntrinsicReport ComputeIntrinsic(const TokenDistribution& dist, double alpha);
IntrinsicReport ComputeIntrinsic(const TokenizerModel& model, const Corpus& corpus,
                                 double alpha = kDefaultRenyiAlpha);

std::string IntrinsicReportJson(const IntrinsicReport& report);

}  // namespace morphotok
