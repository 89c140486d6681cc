#pragma once

// Differential approximants
//   sum_{k=0..M} Q_k(z) (z d/dz)^k F(z) = P(z),  Q_M(0) = 1,
// fitted exactly to a series prefix, plus root/exponent extraction and
// coefficient prediction from the ODE's coefficient recurrence.

#include "gerry/analysis.hpp"
#include "gerry/modarith.hpp"

#include <boost/multiprecision/cpp_complex.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gerry {

using rational = boost::multiprecision::cpp_rational;
using cplx = boost::multiprecision::cpp_complex<64>;

struct DAConfig {
  int M = 1;
  std::vector<int> N;  // degree of Q_0..Q_M
  int K = -1;          // degree of P, -1 for homogeneous

  int unknowns() const {
    int u = K;
    for (int d : N) u += d + 1;
    return u;
  }
  std::string label() const {
    std::ostringstream os;
    os << "M=" << M << " N=[";
    for (size_t i = 0; i < N.size(); ++i) os << (i ? "," : "") << N[i];
    os << "] K=" << K;
    return os.str();
  }
};

struct DiffApproximant {
  DAConfig cfg;
  std::vector<std::vector<rational>> Q;  // Q[k][j]
  std::vector<rational> P;
  int used = 0;  // coefficients matched
};

struct RankDeficient : std::runtime_error {
  int deficient_rows;
  explicit RankDeficient(int d)
      : std::runtime_error("fit_da: matching system rank-deficient by " + std::to_string(d) + " rows"), deficient_rows(d) {}
};

struct PredictionUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace da_detail {

inline bigint lcm(const bigint& a, const bigint& b) { return a / boost::multiprecision::gcd(a, b) * b; }

inline int rank_of(std::vector<std::vector<rational>> A) {
  const size_t n = A.size(), m = n ? A[0].size() : 0;
  size_t r = 0;
  for (size_t c = 0; c < m && r < n; ++c) {
    size_t p = r;
    while (p < n && A[p][c] == 0) ++p;
    if (p == n) continue;
    std::swap(A[p], A[r]);
    for (size_t i = r + 1; i < n; ++i) {
      if (A[i][c] == 0) continue;
      rational f = A[i][c] / A[r][c];
      for (size_t k = c; k < m; ++k) A[i][k] -= f * A[r][k];
    }
    ++r;
  }
  return static_cast<int>(r);
}

// Fraction-free (Bareiss) solve of the n x n system in the first n columns
// of the augmented integer matrix A | b.
inline std::vector<rational> bareiss_solve(std::vector<std::vector<bigint>> A) {
  const size_t n = A.size();
  bigint prev = 1;
  for (size_t k = 0; k < n; ++k) {
    size_t p = k;
    while (p < n && A[p][k] == 0) ++p;
    if (p == n) return {};
    std::swap(A[p], A[k]);
    for (size_t i = k + 1; i < n; ++i) {
      for (size_t j = k + 1; j <= n; ++j) A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) / prev;
      A[i][k] = 0;
    }
    prev = A[k][k];
  }
  std::vector<rational> x(n);
  for (size_t i = n; i-- > 0;) {
    rational s = rational(A[i][n]);
    for (size_t j = i + 1; j < n; ++j) s -= rational(A[i][j]) * x[j];
    x[i] = s / rational(A[i][i]);
  }
  return x;
}

template <class T>
T ipow(T b, int e) {
  T r = 1;
  while (e-- > 0) r *= b;
  return r;
}

}  // namespace da_detail

inline std::vector<rational> to_rationals(const SeriesSample& s) {
  std::vector<rational> c;
  for (const auto& t : s.terms) c.push_back(t.exact ? rational(*t.exact) : rational(t.value));
  return c;
}

inline std::vector<rational> to_rationals(const std::vector<bigint>& v) {
  return {v.begin(), v.end()};
}

// Matches coefficients c_0..c_{n-1}, n = cfg.unknowns().
inline DiffApproximant fit_da(const std::vector<rational>& c, const DAConfig& cfg) {
  if (cfg.M < 1 || static_cast<int>(cfg.N.size()) != cfg.M + 1) throw std::invalid_argument("fit_da: bad degree list");
  for (int d : cfg.N)
    if (d < 0) throw std::invalid_argument("fit_da: negative degree");
  const int n = cfg.unknowns();
  if (n < 1 || n > static_cast<int>(c.size()))
    throw InsufficientData("fit_da: needs " + std::to_string(n) + " coefficients, have " + std::to_string(c.size()));

  // unknown order: Q[k][j] (skipping Q[M][0]), then P[j]
  struct U {
    bool q;
    int k, j;
  };
  std::vector<U> us;
  for (int k = 0; k <= cfg.M; ++k)
    for (int j = 0; j <= cfg.N[k]; ++j)
      if (!(k == cfg.M && j == 0)) us.push_back({true, k, j});
  for (int j = 0; j <= cfg.K; ++j) us.push_back({false, 0, j});

  std::vector<std::vector<rational>> R(n, std::vector<rational>(n + 1));
  for (int e = 0; e < n; ++e) {
    for (int u = 0; u < n; ++u) {
      const auto& x = us[u];
      if (x.q) {
        int m = e - x.j;
        R[e][u] = m >= 0 ? rational(da_detail::ipow(bigint(m), x.k)) * c[m] : rational(0);
      } else {
        R[e][u] = x.j == e ? rational(-1) : rational(0);
      }
    }
    R[e][n] = -rational(da_detail::ipow(bigint(e), cfg.M)) * c[e];
  }
  std::vector<std::vector<bigint>> A(n, std::vector<bigint>(n + 1));
  for (int e = 0; e < n; ++e) {
    bigint den = 1;
    for (auto& v : R[e]) den = da_detail::lcm(den, denominator(v));
    for (int u = 0; u <= n; ++u) A[e][u] = numerator(R[e][u]) * (den / denominator(R[e][u]));
  }
  auto x = da_detail::bareiss_solve(A);
  if (x.empty()) {
    for (auto& row : R) row.pop_back();
    throw RankDeficient(n - da_detail::rank_of(R));
  }
  DiffApproximant da;
  da.cfg = cfg;
  da.used = n;
  da.Q.resize(cfg.M + 1);
  for (int k = 0; k <= cfg.M; ++k) da.Q[k].assign(cfg.N[k] + 1, 0);
  da.Q[cfg.M][0] = 1;
  da.P.assign(std::max(0, cfg.K + 1), 0);
  for (int u = 0; u < n; ++u) (us[u].q ? da.Q[us[u].k][us[u].j] : da.P[us[u].j]) = x[u];
  return da;
}

inline DiffApproximant fit_da(const SeriesSample& s, const DAConfig& cfg) {
  for (size_t i = 0; i < s.size(); ++i)
    if (s.terms[i].n != static_cast<int>(i)) throw std::invalid_argument("fit_da: indices must run 0, 1, 2, ...");
  return fit_da(to_rationals(s), cfg);
}

// Coefficient recurrence of the ODE at order n, over any field-like T:
//   c_n sum_k Q_k0 n^k = P_n - sum_{j>=1} sum_k Q_kj (n-j)^k c_{n-j}
template <class T, class Coef>
std::optional<T> recurrence_step(const DiffApproximant& da, const std::vector<T>& c, int n, Coef conv) {
  T rhs = n < static_cast<int>(da.P.size()) ? conv(da.P[n]) : T(0);
  T den = 0;
  for (int k = 0; k <= da.cfg.M; ++k) {
    den += conv(da.Q[k][0]) * da_detail::ipow(T(n), k);
    for (int j = 1; j < static_cast<int>(da.Q[k].size()); ++j)
      if (n - j >= 0) rhs -= conv(da.Q[k][j]) * da_detail::ipow(T(n - j), k) * c[n - j];
  }
  if (den == 0) return std::nullopt;
  return rhs / den;
}

// Series c_0..c_{count-1} generated by the approximant. Where the recurrence
// leaves c_n free (zero leading factor), the supplied seed value is used.
inline std::vector<rational> regenerate(const DiffApproximant& da, const std::vector<rational>& seed, int count) {
  std::vector<rational> c;
  auto id = [](const rational& r) { return r; };
  for (int n = 0; n < count; ++n) {
    auto v = recurrence_step<rational>(da, c, n, id);
    if (!v) {
      if (n >= static_cast<int>(seed.size())) throw std::domain_error("regenerate: free coefficient without seed");
      v = seed[n];
    }
    c.push_back(*v);
  }
  return c;
}

struct SingularityEstimate {
  std::complex<double> z;
  cplx z_hp;
  double gamma = 0;  // F ~ (1 - z/z_i)^{-gamma}
  bool has_gamma = false;
  bool multiple = false;
  double residual = 0;
};

namespace da_detail {

inline cplx horner(const std::vector<cplx>& a, const cplx& z) {
  cplx s = 0;
  for (size_t i = a.size(); i-- > 0;) s = s * z + a[i];
  return s;
}
inline real magnitude_sum(const std::vector<cplx>& a, const real& r) {
  real s = 0, p = 1;
  for (const auto& x : a) {
    s += abs(x) * p;
    p *= r;
  }
  return s;
}

// Aberth-Ehrlich simultaneous iteration; a[0] + a[1] z + ... + a[d] z^d.
inline std::vector<cplx> poly_roots(std::vector<cplx> a) {
  while (a.size() > 1 && abs(a.back()) == 0) a.pop_back();
  const int d = static_cast<int>(a.size()) - 1;
  if (d < 1) return {};
  std::vector<cplx> da(d);
  for (int i = 1; i <= d; ++i) da[i - 1] = a[i] * real(i);
  real bound = 0;
  for (int i = 0; i < d; ++i) bound = std::max(bound, real(abs(a[i] / a[d])));
  bound += 1;
  // Fujiwara-style scale for the starting circle
  real low = 0;
  for (int i = 1; i <= d; ++i) {
    if (abs(a[i]) == 0) continue;
    real v = pow(real(abs(a[0] / a[i])), real(1) / i);
    if (low == 0 || v < low) low = v;
  }
  real r0 = low > 0 ? low : real(1);
  std::vector<cplx> z(d);
  const real two_pi = 2 * boost::math::constants::pi<real>();
  for (int k = 0; k < d; ++k) {
    real th = two_pi * k / d + real(0.4);
    z[k] = cplx(r0 * cos(th), r0 * sin(th));
  }
  const real tol = real(1e-50);
  for (int it = 0; it < 800; ++it) {
    real worst = 0;
    for (int k = 0; k < d; ++k) {
      cplx p = horner(a, z[k]), dp = horner(da, z[k]);
      if (abs(p) == 0) continue;
      cplx w = p / dp;
      cplx s = 0;
      for (int j = 0; j < d; ++j)
        if (j != k) s += cplx(1) / (z[k] - z[j]);
      cplx step = w / (cplx(1) - w * s);
      z[k] -= step;
      real rel = abs(step) / std::max(real(abs(z[k])), real(1e-30));
      worst = std::max(worst, rel);
    }
    if (worst < tol) break;
  }
  // Newton polish
  for (auto& x : z)
    for (int it = 0; it < 3; ++it) {
      cplx dp = horner(da, x);
      if (abs(dp) == 0) break;
      x -= horner(a, x) / dp;
    }
  (void)bound;
  return z;
}

}  // namespace da_detail

// Roots of Q_M with exponents from the indicial relation.
inline std::vector<SingularityEstimate> singularities(const DiffApproximant& da, double residual_tol = 1e-12,
                                                      double multiple_tol = 1e-10) {
  const int M = da.cfg.M;
  auto conv = [](const std::vector<rational>& q) {
    std::vector<cplx> a;
    for (const auto& x : q) a.emplace_back(real(x));
    return a;
  };
  std::vector<cplx> qm = conv(da.Q[M]), qm1 = conv(da.Q[M - 1]);
  std::vector<cplx> dqm;
  for (size_t i = 1; i < qm.size(); ++i) dqm.push_back(qm[i] * real(i));
  std::vector<SingularityEstimate> out;
  for (const auto& z : da_detail::poly_roots(qm)) {
    SingularityEstimate s;
    s.z_hp = z;
    s.z = {static_cast<double>(z.real()), static_cast<double>(z.imag())};
    real scale = da_detail::magnitude_sum(qm, abs(z));
    s.residual = static_cast<double>(abs(da_detail::horner(qm, z)) / scale);
    if (s.residual > residual_tol) continue;  // not converged: no estimate
    cplx d = da_detail::horner(dqm, z);
    if (abs(d * z) / scale < multiple_tol) {
      s.multiple = true;
    } else {
      cplx lam = cplx(real(M - 1)) - da_detail::horner(qm1, z) / (z * d);
      s.gamma = -static_cast<double>(lam.real());
      s.has_gamma = true;
    }
    out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return std::abs(a.z) < std::abs(b.z); });
  return out;
}

// Smallest-modulus root on the positive real axis, if any.
inline std::optional<SingularityEstimate> physical_singularity(const std::vector<SingularityEstimate>& ss,
                                                               double imag_tol = 1e-8) {
  for (const auto& s : ss)
    if (s.z.real() > 0 && std::abs(s.z.imag()) <= imag_tol * std::abs(s.z)) return s;
  return std::nullopt;
}

struct FittedDA {
  DiffApproximant da;
  std::vector<SingularityEstimate> sing;
  bool defective = false;
  std::string why;
};

struct DefectReport {
  double consensus_radius = 0;
  int flagged = 0;
  bool skipped = false;
  std::string warning;
};

// Flags approximants with a root strictly inside the consensus radius
// (other than their own physical estimate), and physical estimates beyond
// `zscore` standard deviations of the population (zscore <= 0 disables).
inline DefectReport mark_defective(std::vector<FittedDA>& pop, double inside_tol = 0.01, double zscore = 3.0) {
  DefectReport rep;
  if (pop.size() < 3) {
    rep.skipped = true;
    rep.warning = "population below 3: defect filtering skipped";
    return rep;
  }
  std::vector<double> radii;
  for (const auto& f : pop)
    if (auto p = physical_singularity(f.sing)) radii.push_back(std::abs(p->z));
  if (radii.empty()) {
    rep.skipped = true;
    rep.warning = "no approximant has a positive real singularity";
    return rep;
  }
  std::vector<double> sorted = radii;
  std::sort(sorted.begin(), sorted.end());
  const double rho = sorted[sorted.size() / 2];
  rep.consensus_radius = rho;
  double mean = std::accumulate(radii.begin(), radii.end(), 0.0) / radii.size();
  double var = 0;
  for (double r : radii) var += (r - mean) * (r - mean);
  double sd = std::sqrt(var / radii.size());
  for (auto& f : pop) {
    auto phys = physical_singularity(f.sing);
    for (const auto& s : f.sing) {
      if (phys && std::abs(s.z - phys->z) == 0) continue;
      if (std::abs(s.z) < rho * (1 - inside_tol)) {
        f.defective = true;
        f.why = "spurious singularity inside the consensus radius";
        break;
      }
    }
    if (!f.defective && zscore > 0 && phys && sd > 0 && std::abs(std::abs(phys->z) - mean) > zscore * sd) {
      f.defective = true;
      f.why = "radius estimate is an outlier";
    }
    if (f.defective) ++rep.flagged;
  }
  return rep;
}

// Near-diagonal grid: N_k = base + o_k, o_k in 0..spread, with the unknown
// count between nmax - span and nmax.
inline std::vector<DAConfig> da_grid(int M, int nmax, int kmin = -1, int kmax = 3, int span = 10, int spread = 2) {
  std::vector<DAConfig> g;
  for (int K = kmin; K <= kmax; ++K)
    for (int base = 0; base < nmax; ++base) {
      std::vector<int> off(M + 1, 0);
      for (;;) {
        DAConfig c{M, {}, K};
        for (int o : off) c.N.push_back(base + o);
        int u = c.unknowns();
        bool lowest = *std::min_element(off.begin(), off.end()) == 0;  // else a duplicate of base+1
        if (lowest && u >= nmax - span && u <= nmax && u >= 1) g.push_back(c);
        int i = 0;
        while (i <= M && ++off[i] > spread) off[i++] = 0;
        if (i > M) break;
      }
    }
  return g;
}

struct Prediction {
  int n = 0;
  real value = 0;
  real std_dev = 0;
  int agreed_digits = 0;
  int contributors = 0;
};

struct PredictionReport {
  std::vector<Prediction> terms;
  int fitted = 0, defective = 0, failed = 0;
  DefectReport defects;
};

struct PredictOptions {
  double mad_cut = 3.0;
  double inside_tol = 0.01;
  double zscore = 3.0;
  bool filter_defective = true;
};

namespace da_detail {

// digits shared by the surviving predictions, measured by their spread
// (one standard deviation) relative to the mean
inline int agreed_digits(const real& sd, const real& mean) {
  if (mean == 0) return 0;
  real spread = sd / abs(mean);
  if (spread == 0) return std::numeric_limits<real>::digits10;
  double d = -static_cast<double>(log10(spread));
  return std::clamp(static_cast<int>(std::floor(d)), 0, std::numeric_limits<real>::digits10);
}

inline real median(std::vector<real> v) {
  std::sort(v.begin(), v.end());
  size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
}

}  // namespace da_detail

// Fits every grid member, extends each surviving approximant by its
// recurrence (known coefficients are used wherever available) and averages
// per index after a median-absolute-deviation cut.
inline PredictionReport predict_coefficients(const std::vector<rational>& c, const std::vector<DAConfig>& grid, int count,
                                             const PredictOptions& o = {}) {
  if (c.size() < 10) throw InsufficientData("predict_coefficients: needs at least 10 coefficients");
  PredictionReport rep;
  std::vector<FittedDA> pop;
  for (const auto& cfg : grid) {
    if (cfg.unknowns() > static_cast<int>(c.size())) continue;
    try {
      FittedDA f;
      f.da = fit_da(c, cfg);
      f.sing = singularities(f.da);
      pop.push_back(std::move(f));
    } catch (const RankDeficient&) {
      ++rep.failed;
    }
  }
  rep.fitted = static_cast<int>(pop.size());
  if (o.filter_defective) rep.defects = mark_defective(pop, o.inside_tol, o.zscore);

  const int known = static_cast<int>(c.size());
  std::vector<real> cr;
  for (const auto& x : c) cr.push_back(real(x));
  std::vector<std::vector<real>> ext;
  for (const auto& f : pop) {
    if (f.defective) {
      ++rep.defective;
      continue;
    }
    std::vector<real> s = cr;
    bool ok = true;
    auto conv = [](const rational& r) { return real(r); };
    for (int n = known; n < known + count && ok; ++n) {
      auto v = recurrence_step<real>(f.da, s, n, conv);
      if (!v) ok = false;
      else s.push_back(*v);
    }
    if (ok) ext.push_back(std::move(s));
    else ++rep.failed;
  }
  if (ext.empty()) throw PredictionUnavailable("predict_coefficients: no usable approximant");

  for (int n = known; n < known + count; ++n) {
    std::vector<real> v;
    for (const auto& e : ext) v.push_back(e[n]);
    real med = da_detail::median(v);
    std::vector<real> dev;
    for (const auto& x : v) dev.push_back(abs(x - med));
    real mad = da_detail::median(dev);
    std::vector<real> keep;
    for (const auto& x : v)
      if (abs(x - med) <= o.mad_cut * mad) keep.push_back(x);
    if (keep.empty()) keep = v;
    real mean = 0;
    for (const auto& x : keep) mean += x;
    mean /= keep.size();
    real var = 0;
    for (const auto& x : keep) var += (x - mean) * (x - mean);
    Prediction p;
    p.n = n;
    p.value = mean;
    p.std_dev = sqrt(var / keep.size());
    p.agreed_digits = da_detail::agreed_digits(p.std_dev, mean);
    p.contributors = static_cast<int>(keep.size());
    rep.terms.push_back(p);
  }
  return rep;
}

struct ExtendOptions {
  std::vector<int> orders = {1, 2, 3};
  int kmin = -1, kmax = 3;
  int span = 10;
  int floor_digits = 5;
  PredictOptions predict;
};

// Appends predicted terms (tagged with their agreement) until the first one
// whose agreed digits fall below the floor. Series indices must start at 0
// and be consecutive; missing low orders should be supplied as zeros.
inline SeriesSample extend_for_ratio_analysis(const SeriesSample& s, int count, const ExtendOptions& o = {}) {
  for (size_t i = 0; i < s.size(); ++i)
    if (s.terms[i].n != static_cast<int>(i)) throw std::invalid_argument("extend: indices must run 0, 1, 2, ...");
  auto c = to_rationals(s);
  std::vector<DAConfig> grid;
  for (int M : o.orders) {
    auto g = da_grid(M, static_cast<int>(c.size()), o.kmin, o.kmax, o.span);
    grid.insert(grid.end(), g.begin(), g.end());
  }
  auto rep = predict_coefficients(c, grid, count, o.predict);
  SeriesSample out = s;
  for (const auto& p : rep.terms) {
    if (p.agreed_digits < o.floor_digits) break;
    out.terms.push_back({p.n, p.value, p.agreed_digits, std::nullopt});
  }
  return out;
}

}  // namespace gerry
