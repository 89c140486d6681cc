#pragma once

// Column-by-column transfer-matrix sweep over a W-cell-high rectangle.
//
// Geometry: positions 0..W are the horizontal grid lines, 0 at the bottom.
// The kink sits at position r+1 while cell (x, r) is added; below it are the
// edges entering vertex column x, above it the edges leaving it. A move reads
// E (edge into (x,r)) at r and the vertex (x,r+1) at r+1, chooses the
// vertical edge D between them and the outgoing edge T at r+1, and leaves the
// vertex (x,r) at r. The cell is inside iff parity(states 0..r) xor D. In the
// last move (r = 0) the vertex (x,0) also takes the bottom edge B, so nothing
// stays blocked and the kink returns to the top.
//
// Updates are in place. Sources that differ only at r, r+1 form a closed
// class, visited through one representative. All classes with an empty
// vertex run before the arc-arc classes: the former zero the blocked slots
// the latter accumulate into, and feed the "()" states that the latter then
// multiply by their area factor.

#include "gerry/modarith.hpp"
#include "gerry/signature.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace gerry {

struct ConsistencyError : std::logic_error {
  using std::logic_error::logic_error;
};

// Initial count weight * q^area on the signature with arcs at lower/upper.
struct Seed {
  int lower, upper;
  uint64_t weight;
  int area;
};

struct PanelRun {
  int panel = 12;  // 12 or 34
  int side = 0;    // L
  int width = 0;   // W, cells per column
  int columns = 0; // vertex columns swept after the seeded left edge
  std::vector<Seed> init;
  bool forbid_return_to_bottom = false;
  bool seed_cycles = false;
  uint64_t closure_weight = 1;
  bool count_initial_signatures_at_end = false;
  int max_area = 0;  // largest area any counted polygon can have
};

// Grey region holds the bottom-left corner and never touches the top row.
// The left contact is a run of cells from the bottom; closures count twice
// and a final right-side run from the bottom (two corners) counts once more.
inline PanelRun panel_12_run(int L) {
  if (L < 2) throw std::invalid_argument("panel_12_run: L must be at least 2");
  PanelRun r;
  r.panel = 12;
  r.side = L;
  r.width = L - 1;
  r.columns = L - 1;
  for (int k = 1; k <= r.width; ++k) r.init.push_back({0, k, 2, k});
  r.forbid_return_to_bottom = true;
  r.closure_weight = 2;
  r.count_initial_signatures_at_end = true;
  r.max_area = L * (L - 1);
  return r;
}

// Grey region confined to rows 1..L-2 and columns 0..L-2: a run on the left
// side (four rotations) or, seeded from nothing, an interior cycle.
inline PanelRun panel_34_run(int L) {
  if (L < 3) throw std::invalid_argument("panel_34_run: L must be at least 3");
  PanelRun r;
  r.panel = 34;
  r.side = L;
  r.width = L - 2;
  r.columns = L - 1;
  for (int j = 0; j < r.width; ++j)
    for (int k = j + 1; k <= r.width; ++k) r.init.push_back({j, k, 4, k - j});
  r.seed_cycles = true;
  r.closure_weight = 1;
  r.max_area = (L - 2) * (L - 1);
  return r;
}

inline uint64_t arc_signature(int lower, int upper) {
  return bits::set(bits::set(0, lower, SigState::LowerArc), upper, SigState::UpperArc);
}

// Word is uint32_t for 30-bit primes, uint64_t for 62-bit ones.
template <class Word>
struct CountTable {
  int width = 0;
  size_t cap = 1;  // coefficients per polynomial
  uint64_t prime = 0;
  bool areas = true;  // false: q = 1, one coefficient
  std::vector<Word> unblocked, blocked, sap;
  int kink = 0, column = 0, cell = 0;
  bool finished = false;

  size_t unblocked_count() const { return unblocked.size() / cap; }
  size_t blocked_count() const { return blocked.size() / cap; }
  Word* u(size_t i) { return unblocked.data() + i * cap; }
  Word* b(size_t i) { return blocked.data() + i * cap; }
  const Word* u(size_t i) const { return unblocked.data() + i * cap; }
  const Word* b(size_t i) const { return blocked.data() + i * cap; }
  bool blocked_zero() const {
    return std::all_of(blocked.begin(), blocked.end(), [](Word w) { return w == 0; });
  }
};

inline size_t table_bytes(int width, size_t cap, size_t word_bytes) {
  return (motzkin_count(width + 1) + motzkin_count(width) + 1) * cap * word_bytes;
}

template <class Word>
class Sweep {
 public:
  Sweep(const PanelRun& run, uint64_t prime, size_t cap, bool areas) : run_(run) {
    if (run.width < 1 || run.width > max_width) throw std::invalid_argument("sweep: width out of range");
    if (prime >= (uint64_t{1} << (8 * sizeof(Word) - 1))) throw std::invalid_argument("sweep: prime too wide for word");
    if (!areas) cap = 1;
    if (cap < 1) throw std::invalid_argument("sweep: capacity must be positive");
    t_.width = run.width;
    t_.cap = cap;
    t_.prime = prime;
    t_.areas = areas;
    const int n = run.width + 1;
    const uint64_t M = motzkin_count(n);
    sigs_.resize(M);
    for (uint64_t i = 0; i < M; ++i) sigs_[i] = bits::unrank(i, n);
    t_.unblocked.assign(M * cap, 0);
    t_.blocked.assign(motzkin_count(run.width) * cap, 0);
    t_.sap.assign(cap, 0);
    scratch_.assign(cap, 0);
    t_.kink = run.width;
    for (const auto& s : run.init) {
      if (areas && s.area >= static_cast<int>(cap)) continue;
      Word* c = t_.u(bits::rank(arc_signature(s.lower, s.upper), n));
      Word& slot = c[areas ? s.area : 0];
      slot = static_cast<Word>(addmod(slot, s.weight % prime, prime));
    }
  }

  const PanelRun& run() const { return run_; }
  CountTable<Word>& table() { return t_; }
  const CountTable<Word>& table() const { return t_; }
  const std::vector<uint64_t>& signatures() const { return sigs_; }
  bool swept() const { return t_.column >= run_.columns; }

  // one cell move
  void step() {
    if (swept()) throw std::logic_error("sweep: already complete");
    const int r = t_.kink - 1;
    const bool fin = r == 0;
    const size_t M = sigs_.size();
    for (size_t i = 0; i < M; ++i) {
      uint64_t s = sigs_[i];
      if (bits::get(s, r + 1) != SigState::Empty) continue;
      if (bits::get(s, r) == SigState::Empty) empty_class(i, s, r, fin);
      else single_arc_class(i, s, r, fin);
    }
    for (size_t i = 0; i < M; ++i) {
      uint64_t s = sigs_[i];
      auto a = bits::get(s, r), v = bits::get(s, r + 1);
      if (a != SigState::Empty && v != SigState::Empty) arc_pair_class(i, s, a, v, r, fin);
    }
    if (fin) {
      std::fill(t_.blocked.begin(), t_.blocked.end(), Word{0});
      t_.kink = t_.width;
      t_.cell = 0;
      ++t_.column;
    } else {
      t_.kink = r;
      ++t_.cell;
    }
  }

  void column() {
    do step();
    while (t_.cell != 0);
  }

  // end-of-run accounting; returns the SAP polynomial
  const std::vector<Word>& finish() {
    if (!swept()) throw std::logic_error("sweep: finish before the last column");
    if (!t_.finished && run_.count_initial_signatures_at_end) {
      for (int k = 1; k <= t_.width; ++k) add(t_.sap.data(), t_.u(bits::rank(arc_signature(0, k), t_.width + 1)));
    }
    t_.finished = true;
    return t_.sap;
  }

  std::vector<Word> sweep_all() {
    while (!swept()) column();
    return finish();
  }

 private:
  uint64_t p() const { return t_.prime; }
  void add(Word* d, const Word* s) const {
    const Word P = static_cast<Word>(t_.prime);
    for (size_t k = 0; k < t_.cap; ++k) {
      Word x = d[k] + s[k];
      d[k] = x >= P ? x - P : x;
    }
  }
  // d += q*s
  void add_shifted(Word* d, const Word* s) const {
    if (!t_.areas) return add(d, s);
    const Word P = static_cast<Word>(t_.prime);
    for (size_t k = t_.cap - 1; k >= 1; --k) {
      Word x = d[k] + s[k - 1];
      d[k] = x >= P ? x - P : x;
    }
  }
  // d *= q, dropping what falls past the capacity
  void shift(Word* d) const {
    if (!t_.areas) return;
    std::memmove(d + 1, d, (t_.cap - 1) * sizeof(Word));
    d[0] = 0;
  }
  void zero(Word* d) const { std::memset(d, 0, t_.cap * sizeof(Word)); }
  void copy(Word* d, const Word* s) const { std::memcpy(d, s, t_.cap * sizeof(Word)); }
  size_t urank(uint64_t s) const { return bits::rank(s, t_.width + 1); }
  size_t brank(uint64_t s, int pos) const { return bits::rank(bits::erase(s, pos), t_.width); }

  void close(const Word* c) {
    for (uint64_t w = 0; w < run_.closure_weight; ++w) add(t_.sap.data(), c);
  }
  void seed(Word* c) const {
    Word& x = c[t_.areas ? 1 : 0];
    if (t_.areas && t_.cap < 2) return;
    x = static_cast<Word>(addmod(x, 1, p()));
  }

  // empty edge below an empty vertex: stay empty or open a new arc
  void empty_class(size_t si, uint64_t s, int r, bool fin) {
    Word* S = t_.u(si);
    Word* T = t_.u(urank(bits::set(bits::set(s, r, SigState::LowerArc), r + 1, SigState::UpperArc)));
    Word* B = t_.b(brank(s, r + 1));
    if (fin) {
      if (!run_.forbid_return_to_bottom) add(T, S);
      add(S, B);
      return;
    }
    const int delta = bits::parity_upto(s, r);
    add(T, S);  // area factor applied when the "()" class runs
    add(S, B);
    zero(B);
    if (delta) shift(S);
  }

  // arc end on the edge below an empty vertex, and its mirror "empty, arc"
  void single_arc_class(size_t si, uint64_t s, int r, bool fin) {
    const SigState a = bits::get(s, r);
    Word* S = t_.u(si);
    Word* T = t_.u(urank(bits::set(bits::set(s, r, SigState::Empty), r + 1, a)));
    Word* B = t_.b(brank(s, r + 1));
    if (fin) {
      if (a != SigState::LowerArc) throw ConsistencyError("sweep: upper arc end on the bottom edge");
      if (run_.forbid_return_to_bottom) {
        add(T, S);
        add(S, B);
      } else {
        add(T, S);
        copy(S, T);
        add(S, B);
      }
      shift(S);
      return;
    }
    const int delta = bits::parity_upto(s, r);
    Word* tmp = scratch_.data();
    copy(tmp, S);
    add(S, T);
    add(S, B);
    if (delta) shift(S);
    else shift(T);
    copy(B, tmp);
    if (!delta) shift(B);
  }

  void arc_pair_class(size_t si, uint64_t s, SigState a, SigState v, int r, bool fin) {
    Word* S = t_.u(si);
    const int n = t_.width + 1;
    if (a == SigState::LowerArc && v == SigState::UpperArc) {
      const bool alone = bits::set(bits::set(s, r, SigState::Empty), r + 1, SigState::Empty) == 0;
      if (alone) close(S);
      if (fin || bits::parity_upto(s, r)) shift(S);
      if (alone && run_.seed_cycles) seed(S);
      return;
    }
    uint64_t joined = bits::set(bits::set(s, r, SigState::Empty), r + 1, SigState::Empty);
    if (a == SigState::LowerArc && v == SigState::LowerArc) {
      int j = bits::partner(s, r + 1, n);
      joined = bits::set(joined, j, SigState::LowerArc);
    } else if (a == SigState::UpperArc && v == SigState::UpperArc) {
      int j = bits::partner(s, r, n);
      joined = bits::set(joined, j, SigState::UpperArc);
    }
    if (fin) {
      if (a != SigState::LowerArc || v != SigState::LowerArc)
        throw ConsistencyError("sweep: impossible arc pair on the bottom edge");
      add(t_.u(urank(joined)), S);
      shift(S);
      return;
    }
    Word* B = t_.b(brank(joined, r));
    if (bits::parity_upto(s, r)) {
      add(B, S);
      shift(S);
    } else {
      add_shifted(B, S);
    }
  }

  PanelRun run_;
  CountTable<Word> t_;
  std::vector<uint64_t> sigs_;
  std::vector<Word> scratch_;
};

}  // namespace gerry
