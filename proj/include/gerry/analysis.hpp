#pragma once

// Ratio-method estimators and the lambda^{L^2 + dL + e} L^h fit.

#include "gerry/modarith.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gerry {

using real = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<64>>;

struct InsufficientData : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// (index, value) with an agreement tag: exact terms carry digits = -1.
struct Term {
  int n;
  real value;
  int digits = -1;
  std::optional<bigint> exact = std::nullopt;  // set when the term is a known integer
};

struct SeriesSample {
  std::vector<Term> terms;
  int offset = 0;  // leading non-positive terms trimmed away

  size_t size() const { return terms.size(); }
  static SeriesSample from_integers(const std::vector<bigint>& v, int first_index = 0) {
    SeriesSample s;
    for (size_t i = 0; i < v.size(); ++i) s.terms.push_back({first_index + static_cast<int>(i), real(v[i]), -1, v[i]});
    return s;
  }
  // drop leading non-positive terms
  SeriesSample trimmed() const {
    SeriesSample s;
    size_t i = 0;
    while (i < terms.size() && terms[i].value <= 0) ++i;
    s.offset = static_cast<int>(i);
    s.terms.assign(terms.begin() + static_cast<long>(i), terms.end());
    return s;
  }
};

using Trail = std::vector<std::pair<int, real>>;

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InsufficientData(what);
}

inline Trail ratios(const SeriesSample& s) {
  require(s.size() >= 2, "ratios: need at least two terms");
  Trail r;
  for (size_t i = 1; i < s.size(); ++i) {
    const auto& a = s.terms[i - 1];
    const auto& b = s.terms[i];
    if (a.value <= 0 || b.value <= 0) throw std::domain_error("ratios: non-positive term at n=" + std::to_string(b.n));
    if (b.n != a.n + 1) continue;
    r.push_back({b.n, b.value / a.value});
  }
  return r;
}

// Value at index n, if present.
inline const real* at(const Trail& t, int n) {
  auto it = std::lower_bound(t.begin(), t.end(), n, [](const auto& e, int k) { return e.first < k; });
  return (it != t.end() && it->first == n) ? &it->second : nullptr;
}

// l_n = n r_n - (n-1) r_{n-1}; parity: l_n = [n r_n - (n-2) r_{n-2}] / 2
inline Trail linear_intercepts(const Trail& r, bool parity = false) {
  require(r.size() >= (parity ? 3u : 2u), "linear_intercepts: trail too short");
  Trail l;
  const int lag = parity ? 2 : 1;
  for (const auto& [n, v] : r)
    if (const real* p = at(r, n - lag)) l.push_back({n, (real(n) * v - real(n - lag) * *p) / lag});
  return l;
}

inline Trail quadratic_intercepts(const Trail& l) {
  require(l.size() >= 2, "quadratic_intercepts: trail too short");
  Trail q;
  for (const auto& [n, v] : l)
    if (const real* p = at(l, n - 1))
      q.push_back({n, (real(n) * n * v - real(n - 1) * (n - 1) * *p) / real(2 * n - 1)});
  return q;
}

inline Trail exponent_known_zc(const Trail& r, const real& zc) {
  if (zc <= 0) throw std::domain_error("exponent_known_zc: z_c must be positive");
  Trail g;
  for (const auto& [n, v] : r) g.push_back({n, real(n) * (zc * v - 1) + 1});
  return g;
}

inline Trail exponent_unknown_zc(const Trail& r) {
  require(r.size() >= 2, "exponent_unknown_zc: trail too short");
  Trail g;
  for (const auto& [n, v] : r)
    if (const real* p = at(r, n - 1)) g.push_back({n, 1 + real(n) * n * (1 - v / *p)});
  return g;
}

inline Trail growth_known_gamma(const Trail& r, const real& gamma) {
  Trail m;
  for (const auto& [n, v] : r) {
    real den = real(n) + gamma - 1;
    if (den == 0) continue;  // estimator undefined at this n
    m.push_back({n, real(n) * v / den});
  }
  return m;
}

// One level of linear intercepts on an estimator trail: t'_n = n t_n - (n-1) t_{n-1}.
inline Trail extrapolate(const Trail& t, int levels = 1) {
  Trail cur = t;
  for (int k = 0; k < levels && cur.size() >= 2; ++k) cur = linear_intercepts(cur, false);
  return cur;
}

enum class Normalize { DivideLambdaL2, PairRatio };

// c_L / lambda^{L^2}
inline SeriesSample normalize_lattice(const SeriesSample& s, const real& lambda) {
  if (lambda <= 1) throw std::domain_error("normalize_lattice: lambda must exceed 1");
  SeriesSample out = s;
  const real ll = log(lambda);
  for (auto& t : out.terms) {
    t.value = t.value / exp(ll * real(t.n) * t.n);
    t.exact.reset();
  }
  return out;
}

// a_L / b_L on matching indices
inline SeriesSample normalize_pair(const SeriesSample& a, const SeriesSample& b) {
  if (a.size() != b.size()) throw std::invalid_argument("normalize_pair: length mismatch");
  SeriesSample out = a;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a.terms[i].n != b.terms[i].n) throw std::invalid_argument("normalize_pair: index mismatch");
    out.terms[i].value = a.terms[i].value / b.terms[i].value;
    out.terms[i].exact.reset();
    out.terms[i].digits = std::min(a.terms[i].digits < 0 ? 1000 : a.terms[i].digits,
                                   b.terms[i].digits < 0 ? 1000 : b.terms[i].digits);
    if (out.terms[i].digits == 1000) out.terms[i].digits = -1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sub-dominant fit of a normalised sequence a_L ~ lambda^{dL + e} L^h.

enum class FitMethod {
  LocalLog,  // exact local fit of log a_L on the last few terms, per endpoint
  Ratio      // intercepts -> mu, delta_L trail -> h, amplitude trail -> e
};

struct Estimate {
  double value = 0;
  double lo = 0, hi = 0;  // spread of the last `window` extrapolants
  Trail trail;            // per-endpoint estimates
};

struct FitOptions {
  FitMethod method = FitMethod::LocalLog;
  int corrections = 1;   // LocalLog: number of 1/L^j terms
  bool parity = true;    // LocalLog: add (-1)^L/L^2; Ratio: alternate-term intercepts
  int window = 5;
  int levels = 1;        // Ratio: intercept levels applied to estimator trails
  int min_terms = 8;
  int first_index = 0;   // ignore terms below this index
  std::optional<double> b, c, g;  // reference constants for alpha, beta, delta
};

struct AsymptoticFit {
  double lambda = 0;
  Estimate d, e, h;
  double mu = 0, F = 0;
  std::optional<double> alpha, beta, delta;
  Trail ratio, intercept, quadratic, mu_trail, delta_trail, amplitude;
  std::string method;
  int terms = 0;
};

namespace analysis_detail {

inline Estimate summarise(Trail t, int window) {
  Estimate e;
  e.trail = std::move(t);
  if (e.trail.empty()) return e;
  e.value = static_cast<double>(e.trail.back().second);
  e.lo = e.hi = e.value;
  int w = std::min<int>(window, static_cast<int>(e.trail.size()));
  for (int i = 0; i < w; ++i) {
    double v = static_cast<double>(e.trail[e.trail.size() - 1 - i].second);
    e.lo = std::min(e.lo, v);
    e.hi = std::max(e.hi, v);
  }
  return e;
}

// Solves A x = y in place (partial pivoting); false if singular.
inline bool solve(std::vector<std::vector<real>>& A, std::vector<real>& y) {
  const size_t n = y.size();
  for (size_t c = 0; c < n; ++c) {
    size_t piv = c;
    for (size_t r = c + 1; r < n; ++r)
      if (abs(A[r][c]) > abs(A[piv][c])) piv = r;
    if (A[piv][c] == 0) return false;
    std::swap(A[piv], A[c]);
    std::swap(y[piv], y[c]);
    for (size_t r = c + 1; r < n; ++r) {
      real f = A[r][c] / A[c][c];
      for (size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      y[r] -= f * y[c];
    }
  }
  for (size_t c = n; c-- > 0;) {
    for (size_t k = c + 1; k < n; ++k) y[c] -= A[c][k] * y[k];
    y[c] /= A[c][c];
  }
  return true;
}

}  // namespace analysis_detail

inline AsymptoticFit fit_subdominant(const SeriesSample& input, double lambda_in, const FitOptions& o = {}) {
  SeriesSample s;
  for (const auto& t : input.trimmed().terms)
    if (t.n >= o.first_index) s.terms.push_back(t);
  require(static_cast<int>(s.size()) >= o.min_terms,
          "fit_subdominant: " + std::to_string(s.size()) + " usable terms, need " + std::to_string(o.min_terms));
  for (size_t i = 1; i < s.size(); ++i)
    if (s.terms[i].n != s.terms[i - 1].n + 1) throw std::invalid_argument("fit_subdominant: indices must be consecutive");

  const real lambda = lambda_in;
  const real ll = log(lambda);
  AsymptoticFit fit;
  fit.lambda = lambda_in;
  fit.terms = static_cast<int>(s.size());
  fit.ratio = ratios(s);
  fit.intercept = linear_intercepts(fit.ratio, o.parity);
  if (fit.intercept.size() >= 2) fit.quadratic = quadratic_intercepts(fit.intercept);

  Trail dt, ht, et;
  auto amplitude_trail = [&](double d, double h) {
    Trail a;
    for (const auto& t : s.terms)
      a.push_back({t.n, t.value / (exp(ll * real(d) * t.n) * pow(real(t.n), real(h)))});
    return a;
  };

  if (o.method == FitMethod::LocalLog) {
    fit.method = "local-log";
    // log a_L = A + B L + h log L + sum_j c_j / L^j [+ p (-1)^L / L^2]
    const int unknowns = 3 + o.corrections + (o.parity ? 1 : 0);
    require(static_cast<int>(s.size()) >= unknowns, "fit_subdominant: too few terms for the local model");
    for (size_t end = unknowns - 1; end < s.size(); ++end) {
      std::vector<std::vector<real>> A;
      std::vector<real> y;
      for (size_t i = end + 1 - unknowns; i <= end; ++i) {
        const real L = s.terms[i].n;
        std::vector<real> row{1, L, log(L)};
        for (int j = 1; j <= o.corrections; ++j) row.push_back(1 / pow(L, j));
        if (o.parity) row.push_back(((s.terms[i].n & 1) ? -1 : 1) / (L * L));
        A.push_back(row);
        y.push_back(log(s.terms[i].value));
      }
      if (!analysis_detail::solve(A, y)) continue;
      int n = s.terms[end].n;
      dt.push_back({n, y[1] / ll});
      ht.push_back({n, y[2]});
      et.push_back({n, y[0] / ll});
      fit.mu_trail.push_back({n, exp(y[1])});
    }
    fit.d = analysis_detail::summarise(dt, o.window);
    fit.h = analysis_detail::summarise(ht, o.window);
    fit.e = analysis_detail::summarise(et, o.window);
    fit.amplitude = amplitude_trail(fit.d.value, fit.h.value);
  } else {
    fit.method = "ratio";
    // (i) mu from the most refined intercept trail
    fit.mu_trail = fit.quadratic.size() >= 2 ? fit.quadratic : fit.intercept;
    for (const auto& [n, m] : fit.mu_trail) dt.push_back({n, log(m) / ll});
    fit.d = analysis_detail::summarise(dt, o.window);
    // (iii) delta_L = (r_L/mu - 1) L, extrapolated
    const real mu = exp(ll * real(fit.d.value));
    for (const auto& [n, r] : fit.ratio) fit.delta_trail.push_back({n, (r / mu - 1) * n});
    Trail hx = extrapolate(fit.delta_trail, o.levels);
    fit.h = analysis_detail::summarise(hx.empty() ? fit.delta_trail : hx, o.window);
    // (iv) amplitude trail -> lambda^e
    fit.amplitude = amplitude_trail(fit.d.value, fit.h.value);
    Trail ax = extrapolate(fit.amplitude, o.levels);
    for (const auto& [n, a] : (ax.empty() ? fit.amplitude : ax))
      if (a > 0) et.push_back({n, log(a) / ll});
    fit.e = analysis_detail::summarise(et, o.window);
  }
  if (fit.method == "local-log")
    for (const auto& [n, r] : fit.ratio) fit.delta_trail.push_back({n, (r / exp(ll * real(fit.d.value)) - 1) * n});

  fit.mu = std::pow(lambda_in, fit.d.value);
  fit.F = std::pow(lambda_in, fit.e.value);
  if (o.b) fit.alpha = *o.b - fit.d.value;
  if (o.c) fit.beta = *o.c - fit.e.value;
  if (o.g) fit.delta = *o.g - fit.h.value;
  return fit;
}

}  // namespace gerry
