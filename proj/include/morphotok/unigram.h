#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "morphotok/bpe.h"

namespace morphotok {

struct UnigramConfig {
  std::size_t max_piece_length = 16;   // code points
  std::size_t seed_multiplier = 25;    // seed size = multiplier * vocab size
  std::size_t max_seed_pieces = 1000000;
  int em_iterations = 2;               // per pruning round
  double prune_fraction = 0.25;        // of prunable pieces, per round
  double unk_penalty = 10.0;           // nats below the rarest piece
};

struct UnigramPiece {
  std::string piece;
  double log_prob = 0.0;
};

// Trains a piece inventory of exactly `target_pieces` pieces (every code
// point of the corpus included). Log-probabilities are normalized over the
// returned pieces.
std::vector<UnigramPiece> LearnUnigram(const PreTokenCounts& counts,
                                       std::size_t target_pieces,
                                       const UnigramConfig& config);

struct UnigramSegmentation {
  std::vector<std::string> pieces;
  // Indices into `pieces` that were produced by the unknown fallback.
  std::vector<std::size_t> unknown;
  double log_prob = 0.0;
};

// Maximum-probability segmentation of `text` over `log_probs`. Code points
// with no covering piece are emitted singly at `unk_log_prob`.
UnigramSegmentation ViterbiSegment(
    std::string_view text,
    const std::unordered_map<std::string, double>& log_probs,
    std::size_t max_piece_length, double unk_log_prob);

}  // namespace morphotok
