#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morphotok/analysis_table.h"

namespace morphotok {

struct CorrelationResult {
  std::string kind;  // "pearson" or "spearman"
  double estimate = 0.0;
  double p_value = 1.0;
  double df = 0.0;
  std::size_t n = 0;
};

// Two-sided p from t = r * sqrt(n - 2) / sqrt(1 - r^2). Throws ContractError
// for n < 3, unequal lengths or a constant input.
CorrelationResult Pearson(std::span<const double> x, std::span<const double> y);
// Pearson correlation of mid-ranks, with the same p-value approximation.
CorrelationResult Spearman(std::span<const double> x, std::span<const double> y);

// 1-based ranks; tied values share the mean of their ranks.
std::vector<double> MidRanks(std::span<const double> x);

// A model term: `name` (numeric), `C(name)` (categorical), or
// `C(a):C(b)` (interaction of two categoricals).
struct Term {
  enum class Kind { kNumeric, kCategorical, kInteraction };
  Kind kind = Kind::kNumeric;
  std::string first;
  std::string second;  // interaction only

  static Term Parse(std::string_view text);
  static Term Numeric(std::string name) { return {Kind::kNumeric, std::move(name), {}}; }
  static Term Categorical(std::string name) {
    return {Kind::kCategorical, std::move(name), {}};
  }
  static Term Interaction(std::string a, std::string b) {
    return {Kind::kInteraction, std::move(a), std::move(b)};
  }
  std::string ToString() const;
  bool operator==(const Term&) const = default;
};

std::vector<Term> ParseTerms(std::string_view comma_separated);

struct OlsCoefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double t = 0.0;
  double p_value = 1.0;
};

struct OlsResult {
  std::string response;
  std::vector<Term> terms;
  std::vector<OlsCoefficient> coefficients;  // "Intercept" first
  std::vector<std::string> column_names;
  std::vector<std::vector<double>> columns;  // design matrix, by column
  std::vector<double> residuals;
  double rss = 0.0;
  double tss = 0.0;  // about the mean
  double df_resid = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;

  // Throws Error when absent.
  const OlsCoefficient& Coefficient(std::string_view name) const;
};

// Least squares with an intercept, via Householder QR. Categorical terms use
// treatment coding against the alphabetically first level; their columns are
// named `C(name)[T.level]`. A rank-deficient design throws ContractError
// naming the dependent column and the columns it is a combination of.
OlsResult OlsFit(const AnalysisTable& table, std::string_view response,
                 const std::vector<Term>& terms);

// Same, on an explicit design (no intercept added).
OlsResult OlsFitDesign(const std::vector<std::string>& column_names,
                       const std::vector<std::vector<double>>& columns,
                       std::span<const double> y);

struct FTest {
  double f = 0.0;
  double p_value = 1.0;
  double df_num = 0.0;
  double df_den = 0.0;
  double ss_num = 0.0;
  double rss_full = 0.0;
};

// F for dropping (full \ reduced) from the full model. `reduced` must be a
// strict subset of `full`.
FTest NestedF(const AnalysisTable& table, std::string_view response,
              const std::vector<Term>& reduced, const std::vector<Term>& full);

struct AnovaRow {
  std::string term;
  double sum_sq = 0.0;
  double df = 0.0;
  double f = 0.0;
  double p_value = 1.0;
};

struct AnovaResult {
  std::vector<AnovaRow> rows;  // factor rows, then "Residual" (no F)
  bool interaction = false;

  const AnovaRow& Row(std::string_view term) const;
};

// Type-II two-way ANOVA. Each main effect is tested by its drop from the
// main-effects model; with `interaction`, the interaction is tested against
// the main-effects model and every F uses the residual of the full model.
AnovaResult AnovaTwoWay(const AnalysisTable& table, std::string_view response,
                        std::string_view factor_a, std::string_view factor_b,
                        bool interaction = false);

std::string CorrelationJson(const CorrelationResult& r);
std::string OlsJson(const OlsResult& r);
std::string FTestJson(const FTest& r);
std::string AnovaJson(const AnovaResult& r);

}  // namespace morphotok
