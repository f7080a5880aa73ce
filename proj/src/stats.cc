#include "morphotok/stats.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <set>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "morphotok/distributions.h"
#include "morphotok/error.h"

namespace morphotok {
namespace {

using Json = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Json Number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

void CheckPaired(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ContractError("correlation inputs differ in length (" +
                        std::to_string(x.size()) + " vs " +
                        std::to_string(y.size()) + ")");
  }
  if (x.size() < 3) {
    throw ContractError("correlation needs at least 3 pairs, got " +
                        std::to_string(x.size()));
  }
}

CorrelationResult Correlate(std::span<const double> x, std::span<const double> y,
                            std::string kind) {
  CheckPaired(x, y);
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw ContractError("correlation is undefined for a constant input");
  }
  CorrelationResult r;
  r.kind = std::move(kind);
  r.n = x.size();
  r.df = n - 2.0;
  r.estimate = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double denom = 1.0 - r.estimate * r.estimate;
  if (denom <= 0.0) {
    r.p_value = 0.0;
  } else {
    r.p_value = StudentTTwoSidedP(r.estimate * std::sqrt(r.df / denom), r.df);
  }
  return r;
}

struct Design {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};

std::vector<std::string> LevelsOf(const std::vector<std::string>& values) {
  std::set<std::string> s(values.begin(), values.end());
  return {s.begin(), s.end()};
}

struct Indicators {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};

// Treatment coding against the first level.
Indicators DummyCode(const AnalysisTable& table, const std::string& factor) {
  const std::vector<std::string> values = table.Strings(factor);
  const std::vector<std::string> levels = LevelsOf(values);
  Indicators out;
  for (std::size_t l = 1; l < levels.size(); ++l) {
    out.names.push_back("C(" + factor + ")[T." + levels[l] + "]");
    std::vector<double> col(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      col[i] = values[i] == levels[l] ? 1.0 : 0.0;
    }
    out.columns.push_back(std::move(col));
  }
  return out;
}

Design BuildDesign(const AnalysisTable& table, const std::vector<Term>& terms) {
  Design d;
  d.names.push_back("Intercept");
  d.columns.emplace_back(table.row_count(), 1.0);
  for (const Term& term : terms) {
    switch (term.kind) {
      case Term::Kind::kNumeric:
        d.names.push_back(term.first);
        d.columns.push_back(table.Numbers(term.first));
        break;
      case Term::Kind::kCategorical: {
        Indicators ind = DummyCode(table, term.first);
        std::move(ind.names.begin(), ind.names.end(), std::back_inserter(d.names));
        std::move(ind.columns.begin(), ind.columns.end(),
                  std::back_inserter(d.columns));
        break;
      }
      case Term::Kind::kInteraction: {
        const Indicators a = DummyCode(table, term.first);
        const Indicators b = DummyCode(table, term.second);
        for (std::size_t i = 0; i < a.names.size(); ++i) {
          for (std::size_t j = 0; j < b.names.size(); ++j) {
            d.names.push_back(a.names[i] + ":" + b.names[j]);
            std::vector<double> col(table.row_count());
            for (std::size_t r = 0; r < col.size(); ++r) {
              col[r] = a.columns[i][r] * b.columns[j][r];
            }
            d.columns.push_back(std::move(col));
          }
        }
        break;
      }
    }
  }
  return d;
}

Eigen::MatrixXd ToMatrix(const std::vector<std::vector<double>>& columns,
                         std::size_t count, std::size_t rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(count));
  for (std::size_t c = 0; c < count; ++c) {
    for (std::size_t r = 0; r < rows; ++r) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = columns[c][r];
    }
  }
  return m;
}

// Adds columns one at a time; the first that does not raise the rank is
// reported with the earlier columns that reproduce it.
void CheckFullRank(const std::vector<std::string>& names,
                   const std::vector<std::vector<double>>& columns,
                   std::size_t rows) {
  if (columns.size() > rows) {
    throw ContractError("design has " + std::to_string(columns.size()) +
                        " columns but only " + std::to_string(rows) + " rows");
  }
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const Eigen::MatrixXd m = ToMatrix(columns, k + 1, rows);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
    qr.setThreshold(1e-10);
    if (static_cast<std::size_t>(qr.rank()) == k + 1) continue;
    std::string msg = "design is rank deficient: column '" + names[k] + "'";
    if (k == 0) {
      msg += " is all zero";
    } else {
      const Eigen::MatrixXd prev = ToMatrix(columns, k, rows);
      const Eigen::VectorXd coef = prev.colPivHouseholderQr().solve(m.col(
          static_cast<Eigen::Index>(k)));
      msg += " is a linear combination of";
      bool first = true;
      for (std::size_t j = 0; j < k; ++j) {
        if (std::fabs(coef(static_cast<Eigen::Index>(j))) > 1e-8) {
          msg += (first ? " '" : ", '") + names[j] + "'";
          first = false;
        }
      }
      if (first) msg += " earlier columns";
    }
    throw ContractError(msg);
  }
}

std::set<std::string> TermKeys(const std::vector<Term>& terms) {
  std::set<std::string> keys;
  for (const Term& t : terms) keys.insert(t.ToString());
  return keys;
}

// F = (ss_num / df_num) / (rss / df_den), treating numerically zero effects
// as exactly zero so that a constant response yields F = 0.
FTest MakeFTest(double ss_num, double df_num, double rss, double df_den,
                double scale) {
  FTest t;
  t.df_num = df_num;
  t.df_den = df_den;
  const double tol = 1e-12 * std::max(scale, 1e-300);
  t.ss_num = ss_num <= tol ? 0.0 : ss_num;
  t.rss_full = rss <= tol ? 0.0 : rss;
  if (df_den <= 0.0) {
    t.f = kNaN;
    t.p_value = kNaN;
    return t;
  }
  if (t.ss_num == 0.0) {
    t.f = 0.0;
    t.p_value = 1.0;
  } else if (t.rss_full == 0.0) {
    t.f = std::numeric_limits<double>::infinity();
    t.p_value = 0.0;
  } else {
    t.f = (t.ss_num / df_num) / (t.rss_full / df_den);
    t.p_value = FSurvival(t.f, df_num, df_den);
  }
  return t;
}

double SumOfSquares(std::span<const double> y) {
  double s = 0.0;
  for (double v : y) s += v * v;
  return s;
}

}  // namespace

std::vector<double> MidRanks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

CorrelationResult Pearson(std::span<const double> x, std::span<const double> y) {
  return Correlate(x, y, "pearson");
}

CorrelationResult Spearman(std::span<const double> x, std::span<const double> y) {
  CheckPaired(x, y);
  const std::vector<double> rx = MidRanks(x);
  const std::vector<double> ry = MidRanks(y);
  return Correlate(rx, ry, "spearman");
}

Term Term::Parse(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
  };
  auto categorical = [](std::string_view s) -> std::optional<std::string> {
    if (s.size() > 3 && s.substr(0, 2) == "C(" && s.back() == ')') {
      return std::string(s.substr(2, s.size() - 3));
    }
    return std::nullopt;
  };
  text = trim(text);
  if (text.empty()) throw Error("empty model term");
  const std::size_t colon = text.find(':');
  if (colon != std::string_view::npos) {
    auto a = categorical(trim(text.substr(0, colon)));
    auto b = categorical(trim(text.substr(colon + 1)));
    if (!a || !b) {
      throw Error("interaction term '" + std::string(text) +
                  "' must join two categorical terms, as C(a):C(b)");
    }
    return Interaction(*a, *b);
  }
  if (auto c = categorical(text)) return Categorical(*c);
  if (text.find_first_of("()") != std::string_view::npos) {
    throw Error("cannot parse model term '" + std::string(text) + "'");
  }
  return Numeric(std::string(text));
}

std::string Term::ToString() const {
  switch (kind) {
    case Kind::kNumeric: return first;
    case Kind::kCategorical: return "C(" + first + ")";
    case Kind::kInteraction: return "C(" + first + "):C(" + second + ")";
  }
  return first;
}

std::vector<Term> ParseTerms(std::string_view text) {
  std::vector<Term> terms;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string_view piece =
        text.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                           : comma - start);
    terms.push_back(Term::Parse(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return terms;
}

const OlsCoefficient& OlsResult::Coefficient(std::string_view name) const {
  for (const OlsCoefficient& c : coefficients) {
    if (c.name == name) return c;
  }
  throw Error("model has no coefficient named '" + std::string(name) + "'");
}

OlsResult OlsFitDesign(const std::vector<std::string>& column_names,
                       const std::vector<std::vector<double>>& columns,
                       std::span<const double> y) {
  const std::size_t n = y.size();
  const std::size_t p = columns.size();
  if (column_names.size() != p) {
    throw ContractError("column names do not match the design");
  }
  for (const auto& col : columns) {
    if (col.size() != n) throw ContractError("design column length mismatch");
  }
  if (p == 0) throw ContractError("design has no columns");
  CheckFullRank(column_names, columns, n);

  const Eigen::MatrixXd x = ToMatrix(columns, p, n);
  Eigen::VectorXd yv(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) yv(static_cast<Eigen::Index>(i)) = y[i];
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::VectorXd beta = qr.solve(yv);
  const Eigen::VectorXd resid = yv - x * beta;

  OlsResult r;
  r.n = n;
  r.column_names = column_names;
  r.columns = columns;
  r.residuals.assign(resid.data(), resid.data() + resid.size());
  r.rss = resid.squaredNorm();
  const double mean = yv.mean();
  r.tss = (yv.array() - mean).square().sum();
  r.df_resid = static_cast<double>(n) - static_cast<double>(p);
  r.r_squared = r.tss > 0.0 ? 1.0 - r.rss / r.tss : kNaN;

  const auto pi = static_cast<Eigen::Index>(p);
  const Eigen::MatrixXd upper =
      qr.matrixQR().topLeftCorner(pi, pi).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd rinv = upper.triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(pi, pi));
  const double sigma2 = r.df_resid > 0.0 ? r.rss / r.df_resid : kNaN;
  for (std::size_t j = 0; j < p; ++j) {
    const auto ji = static_cast<Eigen::Index>(j);
    OlsCoefficient c;
    c.name = column_names[j];
    c.estimate = beta(ji);
    c.std_error = std::sqrt(sigma2 * rinv.row(ji).squaredNorm());
    c.t = c.estimate / c.std_error;
    c.p_value = std::isfinite(c.t) && r.df_resid > 0.0
                    ? StudentTTwoSidedP(c.t, r.df_resid)
                    : kNaN;
    r.coefficients.push_back(std::move(c));
  }
  return r;
}

OlsResult OlsFit(const AnalysisTable& table, std::string_view response,
                 const std::vector<Term>& terms) {
  const std::vector<double> y = table.Numbers(response);
  Design d = BuildDesign(table, terms);
  OlsResult r = OlsFitDesign(d.names, d.columns, y);
  r.response = std::string(response);
  r.terms = terms;
  return r;
}

FTest NestedF(const AnalysisTable& table, std::string_view response,
              const std::vector<Term>& reduced, const std::vector<Term>& full) {
  const std::set<std::string> rk = TermKeys(reduced);
  const std::set<std::string> fk = TermKeys(full);
  if (!std::includes(fk.begin(), fk.end(), rk.begin(), rk.end())) {
    throw ContractError("reduced model terms are not a subset of the full model");
  }
  if (rk.size() == fk.size()) {
    throw ContractError("reduced and full models are identical; F is undefined");
  }
  const OlsResult small = OlsFit(table, response, reduced);
  const OlsResult big = OlsFit(table, response, full);
  const double df_num = small.df_resid - big.df_resid;
  if (df_num <= 0.0) {
    throw ContractError("full model adds no columns to the reduced model");
  }
  return MakeFTest(std::max(0.0, small.rss - big.rss), df_num, big.rss,
                   big.df_resid, SumOfSquares(table.Numbers(response)));
}

const AnovaRow& AnovaResult::Row(std::string_view term) const {
  for (const AnovaRow& r : rows) {
    if (r.term == term) return r;
  }
  throw Error("ANOVA has no row '" + std::string(term) + "'");
}

AnovaResult AnovaTwoWay(const AnalysisTable& table, std::string_view response,
                        std::string_view factor_a, std::string_view factor_b,
                        bool interaction) {
  for (std::string_view f : {factor_a, factor_b}) {
    if (LevelsOf(table.Strings(f)).size() < 2) {
      throw ContractError("factor '" + std::string(f) + "' does not vary");
    }
  }
  const Term a = Term::Categorical(std::string(factor_a));
  const Term b = Term::Categorical(std::string(factor_b));
  const Term ab = Term::Interaction(std::string(factor_a), std::string(factor_b));
  const OlsResult only_a = OlsFit(table, response, {a});
  const OlsResult only_b = OlsFit(table, response, {b});
  const OlsResult main = OlsFit(table, response, {a, b});
  const OlsResult& denom =
      interaction ? OlsFit(table, response, {a, b, ab}) : main;
  const double scale = SumOfSquares(table.Numbers(response));

  AnovaResult result;
  result.interaction = interaction;
  auto add = [&](const Term& t, double ss, double df) {
    const FTest f = MakeFTest(std::max(0.0, ss), df, denom.rss, denom.df_resid, scale);
    result.rows.push_back({t.ToString(), f.ss_num, df, f.f, f.p_value});
  };
  add(a, only_b.rss - main.rss, only_b.df_resid - main.df_resid);
  add(b, only_a.rss - main.rss, only_a.df_resid - main.df_resid);
  if (interaction) add(ab, main.rss - denom.rss, main.df_resid - denom.df_resid);
  result.rows.push_back({"Residual", denom.rss, denom.df_resid, kNaN, kNaN});
  return result;
}

std::string CorrelationJson(const CorrelationResult& r) {
  Json j;
  j["kind"] = r.kind;
  j["estimate"] = Number(r.estimate);
  j["p_value"] = Number(r.p_value);
  j["df"] = r.df;
  j["n"] = r.n;
  return j.dump(1) + "\n";
}

std::string OlsJson(const OlsResult& r) {
  Json j;
  j["kind"] = "ols";
  j["response"] = r.response;
  Json terms = Json::array();
  for (const Term& t : r.terms) terms.push_back(t.ToString());
  j["terms"] = std::move(terms);
  Json coefs = Json::array();
  for (const OlsCoefficient& c : r.coefficients) {
    coefs.push_back({{"name", c.name},
                     {"estimate", Number(c.estimate)},
                     {"std_error", Number(c.std_error)},
                     {"t", Number(c.t)},
                     {"p_value", Number(c.p_value)}});
  }
  j["coefficients"] = std::move(coefs);
  j["rss"] = r.rss;
  j["df_resid"] = r.df_resid;
  j["r_squared"] = Number(r.r_squared);
  j["n"] = r.n;
  return j.dump(1) + "\n";
}

std::string FTestJson(const FTest& r) {
  Json j;
  j["kind"] = "nested_f";
  j["f"] = Number(r.f);
  j["p_value"] = Number(r.p_value);
  j["df_num"] = r.df_num;
  j["df_den"] = r.df_den;
  j["ss_num"] = r.ss_num;
  j["rss_full"] = r.rss_full;
  return j.dump(1) + "\n";
}

std::string AnovaJson(const AnovaResult& r) {
  Json j;
  j["kind"] = "anova";
  j["type"] = 2;
  j["interaction"] = r.interaction;
  Json rows = Json::array();
  for (const AnovaRow& row : r.rows) {
    rows.push_back({{"term", row.term},
                    {"sum_sq", row.sum_sq},
                    {"df", row.df},
                    {"f", Number(row.f)},
                    {"p_value", Number(row.p_value)}});
  }
  j["rows"] = std::move(rows);
  return j.dump(1) + "\n";
}

}  // namespace morphotok
