#pragma once

// Exhaustive ground truth on small boards: two-region partitions, cycles
// (boundaries of connected hole-free cell sets) and the four contact classes
// the transfer runs are built from.

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

namespace gerry {

struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace oracle_detail {

// Cell (x, y) is bit y*cols + x; y = 0 is the bottom row.
struct Board {
  int rows, cols;
  uint64_t full, col0, colN, border;

  Board(int r, int c) : rows(r), cols(c) {
    full = (r * c == 64) ? ~uint64_t{0} : ((uint64_t{1} << (r * c)) - 1);
    col0 = colN = border = 0;
    for (int y = 0; y < r; ++y) {
      col0 |= uint64_t{1} << (y * c);
      colN |= uint64_t{1} << (y * c + c - 1);
    }
    border = col0 | colN | row(0) | row(r - 1);
  }
  uint64_t row(int y) const { return ((uint64_t{1} << cols) - 1) << (y * cols); }
  uint64_t cell(int x, int y) const { return uint64_t{1} << (y * cols + x); }

  uint64_t grow(uint64_t s) const {
    return (s | ((s << 1) & ~col0) | ((s >> 1) & ~colN) | (s << cols) | (s >> cols)) & full;
  }
  // 4-connected closure of seed inside region
  uint64_t flood(uint64_t seed, uint64_t region) const {
    uint64_t s = seed & region;
    for (;;) {
      uint64_t n = grow(s) & region;
      if (n == s) return s;
      s = n;
    }
  }
  bool connected(uint64_t m) const { return m && flood(m & (~m + 1), m) == m; }
  // no complement cell is cut off from the outside
  bool hole_free(uint64_t m) const {
    uint64_t c = ~m & full;
    return flood(c & border, c) == c;
  }
};

template <class F>
void parallel_range(uint64_t lo, uint64_t hi, int threads, F&& body) {
  threads = std::max(1, threads);
  if (threads == 1 || hi - lo < 4096) {
    body(lo, hi, 0);
    return;
  }
  std::vector<std::thread> pool;
  uint64_t chunk = (hi - lo + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    uint64_t a = lo + chunk * t, b = std::min(hi, a + chunk);
    if (a >= b) break;
    pool.emplace_back([&, a, b, t] { body(a, b, t); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace oracle_detail

inline constexpr int oracle_default_max_cells = 16;  // L = 4; L = 5 needs opt-in
inline constexpr int oracle_hard_max_cells = 25;

inline void check_budget(int cells, bool allow_large) {
  int cap = allow_large ? oracle_hard_max_cells : oracle_default_max_cells;
  if (cells > cap) throw BudgetError("oracle: board of " + std::to_string(cells) + " cells exceeds budget");
}

// g[k] for k = 0..L^2: labelled colourings with both colour classes
// non-empty and connected, grey area k. Each partition appears twice.
inline std::vector<uint64_t> brute_partitions(int L, bool allow_large = false, int threads = 1) {
  if (L < 1) throw std::invalid_argument("brute_partitions: L must be positive");
  check_budget(L * L, allow_large);
  oracle_detail::Board b(L, L);
  int n = L * L;
  std::vector<std::vector<uint64_t>> part(std::max(1, threads), std::vector<uint64_t>(n + 1, 0));
  oracle_detail::parallel_range(1, b.full, threads, [&](uint64_t lo, uint64_t hi, int t) {
    auto& g = part[t];
    for (uint64_t m = lo; m < hi; ++m)
      if (b.connected(m) && b.connected(~m & b.full)) ++g[__builtin_popcountll(m)];
  });
  std::vector<uint64_t> g(n + 1, 0);
  for (auto& p : part)
    for (int k = 0; k <= n; ++k) g[k] += p[k];
  return g;
}

// Cycles in a rows x cols cell rectangle by enclosed area (index 0..rows*cols).
inline std::vector<uint64_t> brute_cycles(int rows, int cols, bool allow_large = false) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("brute_cycles: empty board");
  check_budget(rows * cols, allow_large);
  oracle_detail::Board b(rows, cols);
  std::vector<uint64_t> c(rows * cols + 1, 0);
  for (uint64_t m = 1; m <= b.full; ++m)
    if (b.connected(m) && b.hole_free(m)) ++c[__builtin_popcountll(m)];
  return c;
}

// Cycles in an L x L square touching both the left and the right side.
inline std::vector<uint64_t> brute_pcas(int L, bool allow_large = false) {
  if (L < 1) throw std::invalid_argument("brute_pcas: L must be positive");
  check_budget(L * L, allow_large);
  oracle_detail::Board b(L, L);
  std::vector<uint64_t> c(L * L + 1, 0);
  for (uint64_t m = 1; m <= b.full; ++m)
    if ((m & b.col0) && (m & b.colN) && b.connected(m) && b.hole_free(m)) ++c[__builtin_popcountll(m)];
  return c;
}

// Contact class of the grey region chosen for a partition:
//   1: two corners, 2: one corner, 3: no corner but a side, 4: interior.
// census[panel][k] holds the count with grey area k, summed over all
// orientations, so the four of them add up to one entry per partition.
struct PanelCensus {
  std::array<std::vector<uint64_t>, 5> by_panel;  // index 0 unused
  std::vector<uint64_t> total() const {
    std::vector<uint64_t> t(by_panel[1].size(), 0);
    for (int p = 1; p <= 4; ++p)
      for (size_t k = 0; k < t.size(); ++k) t[k] += by_panel[p][k];
    return t;
  }
};

inline constexpr std::array<int, 5> panel_symmetry = {0, 2, 4, 4, 1};

inline PanelCensus brute_panel_census(int L, bool allow_large = false) {
  if (L < 1) throw std::invalid_argument("brute_panel_census: L must be positive");
  check_budget(L * L, allow_large);
  oracle_detail::Board b(L, L);
  int n = L * L;
  PanelCensus pc;
  for (auto& v : pc.by_panel) v.assign(n + 1, 0);
  const uint64_t c00 = b.cell(0, 0);
  const uint64_t corners = c00 | b.cell(L - 1, 0) | b.cell(0, L - 1) | b.cell(L - 1, L - 1);
  for (uint64_t m = 1; m < b.full; ++m) {
    uint64_t w = ~m & b.full;
    if (!(m & c00)) continue;  // each unordered partition once: m holds the corner cell (0,0)
    if (!b.connected(m) || !b.connected(w)) continue;
    int cm = __builtin_popcountll(m & corners);
    uint64_t grey;
    if (cm == 2) grey = m;
    else if (cm == 1) grey = m;
    else if (cm == 3) grey = w;  // white holds exactly one corner
    else grey = w;               // m holds all four; white has none
    int cg = __builtin_popcountll(grey & corners);
    int panel = cg == 2 ? 1 : cg == 1 ? 2 : (grey & b.border) ? 3 : 4;
    ++pc.by_panel[panel][__builtin_popcountll(grey)];
  }
  return pc;
}

}  // namespace gerry
