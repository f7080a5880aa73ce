#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "morphotok/error.h"
#include "morphotok/unicode.h"
#include "morphotok/unigram.h"

namespace morphotok {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Expected counts below this are clamped before the M-step.
constexpr double kCountFloor = 1e-8;

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

struct Arc {
  std::size_t begin;  // code-point position
  std::size_t end;
  std::size_t piece;
};

// One distinct pre-token with every piece occurrence inside it.
struct Lattice {
  std::size_t length = 0;  // code points
  double count = 0.0;
  std::vector<Arc> arcs;   // sorted by end, then begin
};

struct Piece {
  std::string text;
  double log_prob = 0.0;
  bool required = false;  // single code point
};

class Trainer {
 public:
  Trainer(const PreTokenCounts& counts, const UnigramConfig& config)
      : config_(config) {
    for (const auto& [text, count] : counts) {
      if (count == 0) continue;
      words_.push_back({SplitCodePoints(text), static_cast<double>(count)});
    }
  }

  std::vector<UnigramPiece> Run(std::size_t target) {
    Seed(target);
    while (true) {
      for (int i = 0; i < config_.em_iterations; ++i) EmStep();
      if (pieces_.size() <= target) break;
      Prune(target);
    }
    std::vector<UnigramPiece> out;
    out.reserve(pieces_.size());
    for (const Piece& p : pieces_) out.push_back({p.text, p.log_prob});
    return out;
  }

 private:
  struct Word {
    std::vector<std::string_view> cps;
    double count;
  };

  void Seed(std::size_t target) {
    std::set<std::string> alphabet;
    std::unordered_map<std::string, double> freq;
    for (const Word& w : words_) {
      for (std::size_t b = 0; b < w.cps.size(); ++b) {
        std::string s;
        for (std::size_t e = b; e < w.cps.size() && e - b < config_.max_piece_length;
             ++e) {
          s += w.cps[e];
          if (e == b) {
            alphabet.insert(s);
            freq[s] += w.count;
          } else {
            freq[s] += w.count * static_cast<double>(e - b + 1);
          }
        }
      }
    }
    if (alphabet.size() > target) {
      throw ContractError("vocabulary of " + std::to_string(target) +
                          " pieces cannot hold the alphabet of " +
                          std::to_string(alphabet.size()) + " code points");
    }
    // `freq` holds frequency * length for multi-code-point substrings.
    std::vector<std::pair<std::string, double>> multi;
    for (auto& [s, score] : freq) {
      if (!alphabet.count(s)) multi.emplace_back(s, score);
    }
    std::sort(multi.begin(), multi.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    const std::size_t keep = std::min(
        {multi.size(), config_.max_seed_pieces, config_.seed_multiplier * target});
    multi.resize(keep);
    if (alphabet.size() + multi.size() < target) {
      throw ContractError("corpus supports only " +
                          std::to_string(alphabet.size() + multi.size()) +
                          " unigram pieces; requested " + std::to_string(target));
    }

    for (const std::string& cp : alphabet) {
      pieces_.push_back({cp, std::log(freq[cp]), true});
    }
    for (auto& [s, score] : multi) pieces_.push_back({s, std::log(score), false});
    Normalize();
  }

  void Normalize() {
    double z = kNegInf;
    for (const Piece& p : pieces_) z = LogAdd(z, p.log_prob);
    for (Piece& p : pieces_) p.log_prob -= z;
  }

  void BuildLattices() {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < pieces_.size(); ++i) index[pieces_[i].text] = i;
    lattices_.clear();
    lattices_.reserve(words_.size());
    for (const Word& w : words_) {
      Lattice lat;
      lat.length = w.cps.size();
      lat.count = w.count;
      for (std::size_t e = 1; e <= w.cps.size(); ++e) {
        const std::size_t lo =
            e > config_.max_piece_length ? e - config_.max_piece_length : 0;
        for (std::size_t b = e; b-- > lo;) {
          std::string s;
          for (std::size_t k = b; k < e; ++k) s += w.cps[k];
          auto it = index.find(s);
          if (it != index.end()) lat.arcs.push_back({b, e, it->second});
        }
      }
      lattices_.push_back(std::move(lat));
    }
  }

  // Forward log-marginals, optionally with one piece removed.
  std::vector<double> Forward(const Lattice& lat,
                              std::size_t excluded = SIZE_MAX) const {
    std::vector<double> alpha(lat.length + 1, kNegInf);
    alpha[0] = 0.0;
    for (const Arc& a : lat.arcs) {
      if (a.piece == excluded || alpha[a.begin] == kNegInf) continue;
      alpha[a.end] = LogAdd(alpha[a.end], alpha[a.begin] + pieces_[a.piece].log_prob);
    }
    return alpha;
  }

  std::vector<double> Backward(const Lattice& lat) const {
    std::vector<double> beta(lat.length + 1, kNegInf);
    beta[lat.length] = 0.0;
    for (auto it = lat.arcs.rbegin(); it != lat.arcs.rend(); ++it) {
      if (beta[it->end] == kNegInf) continue;
      beta[it->begin] =
          LogAdd(beta[it->begin], beta[it->end] + pieces_[it->piece].log_prob);
    }
    return beta;
  }

  void EmStep() {
    BuildLattices();
    std::vector<double> expected(pieces_.size(), 0.0);
    for (const Lattice& lat : lattices_) {
      const std::vector<double> alpha = Forward(lat);
      const std::vector<double> beta = Backward(lat);
      const double z = alpha[lat.length];
      for (const Arc& a : lat.arcs) {
        const double lp =
            alpha[a.begin] + pieces_[a.piece].log_prob + beta[a.end] - z;
        if (lp > kNegInf) expected[a.piece] += lat.count * std::exp(lp);
      }
    }
    double total = 0.0;
    for (double& e : expected) {
      e = std::max(e, kCountFloor);
      total += e;
    }
    const double log_total = std::log(total);
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      pieces_[i].log_prob = std::log(expected[i]) - log_total;
    }
  }

  void Prune(std::size_t target) {
    BuildLattices();
    std::vector<double> loss(pieces_.size(), 0.0);
    for (const Lattice& lat : lattices_) {
      const double z = Forward(lat)[lat.length];
      std::vector<std::size_t> inside;
      for (const Arc& a : lat.arcs) {
        if (!pieces_[a.piece].required) inside.push_back(a.piece);
      }
      std::sort(inside.begin(), inside.end());
      inside.erase(std::unique(inside.begin(), inside.end()), inside.end());
      for (std::size_t piece : inside) {
        const double without = Forward(lat, piece)[lat.length];
        loss[piece] += lat.count * (z - without);
      }
    }

    std::vector<std::size_t> prunable;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      if (!pieces_[i].required) prunable.push_back(i);
    }
    std::sort(prunable.begin(), prunable.end(), [&](std::size_t a, std::size_t b) {
      if (loss[a] != loss[b]) return loss[a] < loss[b];
      if (pieces_[a].log_prob != pieces_[b].log_prob) {
        return pieces_[a].log_prob < pieces_[b].log_prob;
      }
      return pieces_[a].text > pieces_[b].text;
    });
    std::size_t remove = static_cast<std::size_t>(
        config_.prune_fraction * static_cast<double>(prunable.size()));
    remove = std::clamp<std::size_t>(remove, 1, pieces_.size() - target);

    std::vector<bool> drop(pieces_.size(), false);
    for (std::size_t i = 0; i < remove; ++i) drop[prunable[i]] = true;
    std::vector<Piece> kept;
    kept.reserve(pieces_.size() - remove);
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      if (!drop[i]) kept.push_back(std::move(pieces_[i]));
    }
    pieces_ = std::move(kept);
    Normalize();
  }

  UnigramConfig config_;
  std::vector<Word> words_;
  std::vector<Piece> pieces_;
  std::vector<Lattice> lattices_;
};

}  // namespace

std::vector<UnigramPiece> LearnUnigram(const PreTokenCounts& counts,
                                       std::size_t target_pieces,
                                       const UnigramConfig& config) {
  if (config.max_piece_length == 0 || config.em_iterations < 1 ||
      !(config.prune_fraction > 0.0 && config.prune_fraction < 1.0)) {
    throw ContractError("invalid unigram training configuration");
  }
  return Trainer(counts, config).Run(target_pieces);
}

UnigramSegmentation ViterbiSegment(
    std::string_view text,
    const std::unordered_map<std::string, double>& log_probs,
    std::size_t max_piece_length, double unk_log_prob) {
  const std::vector<std::string_view> cps = SplitCodePoints(text);
  const std::size_t n = cps.size();
  std::vector<double> best(n + 1, kNegInf);
  std::vector<std::size_t> from(n + 1, 0);
  std::vector<bool> unknown(n + 1, false);
  best[0] = 0.0;
  for (std::size_t e = 1; e <= n; ++e) {
    const std::size_t lo = e > max_piece_length ? e - max_piece_length : 0;
    // Longer pieces first so that exact ties prefer fewer tokens.
    for (std::size_t b = lo; b < e; ++b) {
      if (best[b] == kNegInf) continue;
      std::string s;
      for (std::size_t k = b; k < e; ++k) s += cps[k];
      auto it = log_probs.find(s);
      if (it == log_probs.end()) continue;
      const double score = best[b] + it->second;
      if (score > best[e]) {
        best[e] = score;
        from[e] = b;
        unknown[e] = false;
      }
    }
    if (best[e - 1] != kNegInf && !log_probs.count(std::string(cps[e - 1])) &&
        best[e - 1] + unk_log_prob > best[e]) {
      best[e] = best[e - 1] + unk_log_prob;
      from[e] = e - 1;
      unknown[e] = true;
    }
  }

  UnigramSegmentation out;
  out.log_prob = n == 0 ? 0.0 : best[n];
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::vector<bool> span_unknown;
  for (std::size_t e = n; e > 0; e = from[e]) {
    spans.emplace_back(from[e], e);
    span_unknown.push_back(unknown[e]);
  }
  for (std::size_t i = spans.size(); i-- > 0;) {
    std::string s;
    for (std::size_t k = spans[i].first; k < spans[i].second; ++k) s += cps[k];
    if (span_unknown[i]) out.unknown.push_back(out.pieces.size());
    out.pieces.push_back(std::move(s));
  }
  return out;
}

}  // namespace morphotok
