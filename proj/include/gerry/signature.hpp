#pragma once

// Boundary-line signatures and their Motzkin-path perfect hash.
//
// A signature of width W holds W+1 states, position 0 at the bottom. States
// are packed two bits each into one word, position i in bits 2i..2i+1.
// Lower/upper arc ends map to up/down steps, everything else to a level step.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gerry {

enum class SigState : uint8_t { Empty = 0, LowerArc = 1, UpperArc = 2, Blocked = 3 };

inline constexpr int max_width = 30;
inline constexpr int max_path = max_width + 1;

enum class Step : uint8_t { Level = 0, Up = 1, Down = 2 };

class MotzkinTables {
 public:
  // completions(n, i, h): ways to finish an n-step path from step i at height h
  uint64_t completions(int n, int i, int h) const {
    if (h > n - i) return 0;
    return t_[n][i * (max_path + 2) + h];
  }
  uint64_t count(int n) const { return completions(n, 0, 0); }

  static const MotzkinTables& get() {
    static const MotzkinTables tabs;
    return tabs;
  }

 private:
  MotzkinTables() {
    for (int n = 0; n <= max_path; ++n) {
      auto& t = t_[n];
      t.assign((n + 1) * (max_path + 2), 0);
      auto at = [&](int i, int h) -> uint64_t& { return t[i * (max_path + 2) + h]; };
      at(n, 0) = 1;
      for (int i = n - 1; i >= 0; --i)
        for (int h = 0; h <= n - i; ++h)
          at(i, h) = at(i + 1, h) + at(i + 1, h + 1) + (h > 0 ? at(i + 1, h - 1) : 0);
    }
  }
  std::array<std::vector<uint64_t>, max_path + 1> t_;
};

// Number of n-step Motzkin paths. Table-backed to n = 31, recurrence beyond.
inline uint64_t motzkin_count(int n) {
  if (n < 0) throw std::domain_error("motzkin_count: negative length");
  if (n <= max_path) return MotzkinTables::get().count(n);
  static thread_local std::vector<unsigned __int128> memo;
  if (memo.empty())
    for (int k = 0; k <= max_path; ++k) memo.push_back(MotzkinTables::get().count(k));
  while (static_cast<int>(memo.size()) <= n) {
    int m = static_cast<int>(memo.size());
    unsigned __int128 s = memo[m - 1];
    for (int k = 0; k <= m - 2; ++k) s += memo[k] * memo[m - 2 - k];
    memo.push_back(s);
  }
  if (memo[n] > UINT64_MAX) throw std::overflow_error("motzkin_count: exceeds 64 bits");
  return static_cast<uint64_t>(memo[n]);
}

namespace bits {

inline SigState get(uint64_t b, int i) { return static_cast<SigState>((b >> (2 * i)) & 3u); }
inline uint64_t set(uint64_t b, int i, SigState s) {
  return (b & ~(uint64_t{3} << (2 * i))) | (uint64_t(s) << (2 * i));
}
// drop position i, shifting higher positions down by one
inline uint64_t erase(uint64_t b, int i) {
  uint64_t lo = b & ((uint64_t{1} << (2 * i)) - 1);
  return lo | ((b >> (2 * i + 2)) << (2 * i));
}
// parity of nonempty states among positions 0..i
inline int parity_upto(uint64_t b, int i) {
  uint64_t m = (i >= 31) ? ~uint64_t{0} : ((uint64_t{1} << (2 * i + 2)) - 1);
  uint64_t x = b & m;
  return __builtin_popcountll((x | (x >> 1)) & 0x5555555555555555ull) & 1;
}
// position of the arc end matching the one at i
inline int partner(uint64_t b, int i, int n) {
  int depth = 0;
  if (get(b, i) == SigState::LowerArc) {
    for (int j = i; j < n; ++j) {
      auto s = get(b, j);
      if (s == SigState::LowerArc) ++depth;
      else if (s == SigState::UpperArc && --depth == 0) return j;
    }
  } else {
    for (int j = i; j >= 0; --j) {
      auto s = get(b, j);
      if (s == SigState::UpperArc) ++depth;
      else if (s == SigState::LowerArc && --depth == 0) return j;
    }
  }
  return -1;
}

// 0-based lexicographic rank (level < up < down) of an n-step path with no
// blocked state in it. Caller guarantees validity.
inline uint64_t rank(uint64_t b, int n) {
  const auto& T = MotzkinTables::get();
  uint64_t r = 0;
  int h = 0;
  for (int i = 0; i < n; ++i) {
    switch (get(b, i)) {
      case SigState::LowerArc: r += T.completions(n, i + 1, h); ++h; break;
      case SigState::UpperArc:
        r += T.completions(n, i + 1, h) + T.completions(n, i + 1, h + 1);
        --h;
        break;
      default: break;
    }
  }
  return r;
}

inline uint64_t unrank(uint64_t r, int n) {
  const auto& T = MotzkinTables::get();
  uint64_t b = 0;
  int h = 0;
  for (int i = 0; i < n; ++i) {
    uint64_t lv = T.completions(n, i + 1, h);
    if (r < lv) continue;
    r -= lv;
    uint64_t up = T.completions(n, i + 1, h + 1);
    if (r < up) { b = set(b, i, SigState::LowerArc); ++h; continue; }
    r -= up;
    b = set(b, i, SigState::UpperArc);
    --h;
  }
  return b;
}

}  // namespace bits

struct Signature {
  uint64_t packed = 0;
  int width = 0;  // W; the string has W+1 states
  int kink = 0;

  int size() const { return width + 1; }
  SigState operator[](int i) const { return bits::get(packed, i); }
  void set(int i, SigState s) { packed = bits::set(packed, i, s); }
  bool blocked() const { return (*this)[kink] == SigState::Blocked; }
  bool operator==(const Signature&) const = default;
};

inline char state_char(SigState s) {
  constexpr std::string_view c = ".()*";
  return c[static_cast<int>(s)];
}

// ".(*)" style text, bottom position first
inline std::string to_string(const Signature& s) {
  std::string out;
  for (int i = 0; i < s.size(); ++i) out += state_char(s[i]);
  return out;
}

// Throws std::invalid_argument unless arcs balance and any Blocked sits at the kink.
inline void validate(const Signature& s) {
  if (s.width < 1 || s.width > max_width) throw std::invalid_argument("signature: width out of range");
  if (s.kink < 0 || s.kink > s.width) throw std::invalid_argument("signature: kink out of range");
  if (s.width < 31 && (s.packed >> (2 * s.size())) != 0)
    throw std::invalid_argument("signature: stray bits beyond length");
  int depth = 0;
  for (int i = 0; i < s.size(); ++i) {
    switch (s[i]) {
      case SigState::LowerArc: ++depth; break;
      case SigState::UpperArc:
        if (--depth < 0) throw std::invalid_argument("signature: unmatched upper arc end");
        break;
      case SigState::Blocked:
        if (i != s.kink) throw std::invalid_argument("signature: blocked state away from kink");
        break;
      default: break;
    }
  }
  if (depth != 0) throw std::invalid_argument("signature: unmatched lower arc end");
}

inline Signature parse_signature(std::string_view text, int kink = -1) {
  Signature s;
  s.width = static_cast<int>(text.size()) - 1;
  s.kink = kink < 0 ? s.width : kink;
  for (int i = 0; i < static_cast<int>(text.size()); ++i) {
    auto p = std::string_view(".()*").find(text[i]);
    if (p == std::string_view::npos) throw std::invalid_argument("signature: bad state character");
    if (p == 3 && kink < 0) s.kink = i;
    s.set(i, static_cast<SigState>(p));
  }
  validate(s);
  return s;
}

inline std::vector<Step> to_motzkin(const Signature& s) {
  validate(s);
  std::vector<Step> path;
  for (int i = 0; i < s.size(); ++i) {
    if (s[i] == SigState::Blocked) continue;
    path.push_back(static_cast<Step>(s[i]));
  }
  return path;
}

// Phi: 1-based rank among the M_{W+1} unblocked signatures.
inline uint64_t hash_unblocked(const Signature& s) {
  validate(s);
  if (s.blocked()) throw std::logic_error("hash_unblocked: signature is blocked");
  return bits::rank(s.packed, s.size()) + 1;
}

// Psi: drop the blocked state and rank the remaining W states, 1-based.
inline uint64_t hash_blocked(const Signature& s) {
  validate(s);
  if (!s.blocked()) throw std::logic_error("hash_blocked: no blocked state at the kink");
  return bits::rank(bits::erase(s.packed, s.kink), s.width) + 1;
}

inline Signature unhash_unblocked(uint64_t i, int width, int kink = -1) {
  if (width < 1 || width > max_width) throw std::out_of_range("unhash: width out of range");
  if (i < 1 || i > motzkin_count(width + 1)) throw std::out_of_range("unhash: index out of range");
  return {bits::unrank(i - 1, width + 1), width, kink < 0 ? width : kink};
}

inline Signature unhash_blocked(uint64_t i, int width, int kink) {
  if (width < 1 || width > max_width) throw std::out_of_range("unhash: width out of range");
  if (kink < 0 || kink > width) throw std::out_of_range("unhash: kink out of range");
  if (i < 1 || i > motzkin_count(width)) throw std::out_of_range("unhash: index out of range");
  uint64_t rest = bits::unrank(i - 1, width);
  uint64_t lo = rest & ((uint64_t{1} << (2 * kink)) - 1);
  uint64_t hi = (rest >> (2 * kink)) << (2 * kink + 2);
  uint64_t b = lo | hi | (uint64_t(SigState::Blocked) << (2 * kink));
  return {b, width, kink};
}

}  // namespace gerry
