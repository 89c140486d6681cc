#pragma once

// Word-size modular arithmetic and CRT reconstruction.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace gerry {

using bigint = boost::multiprecision::cpp_int;
using u128 = unsigned __int128;

inline uint64_t addmod(uint64_t a, uint64_t b, uint64_t p) {
  uint64_t s = a + b;  // p < 2^63 so no wrap
  return s >= p ? s - p : s;
}
inline uint64_t submod(uint64_t a, uint64_t b, uint64_t p) { return a >= b ? a - b : a + p - b; }
inline uint64_t mulmod(uint64_t a, uint64_t b, uint64_t p) { return uint64_t(u128(a) * b % p); }

inline uint64_t powmod(uint64_t a, uint64_t e, uint64_t p) {
  uint64_t r = 1 % p;
  for (a %= p; e; e >>= 1, a = mulmod(a, a, p))
    if (e & 1) r = mulmod(r, a, p);
  return r;
}
inline uint64_t invmod(uint64_t a, uint64_t p) { return powmod(a, p - 2, p); }  // p prime

// Miller-Rabin with the first twelve prime bases: deterministic below 3.3e24.
inline bool is_prime(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t q : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37})
    if (n % q == 0) return n == q;
  uint64_t d = n - 1;
  int s = 0;
  while (!(d & 1)) d >>= 1, ++s;
  for (uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool comp = true;
    for (int i = 1; i < s && comp; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) comp = false;
    }
    if (comp) return false;
  }
  return true;
}

struct PrimeSet {
  std::vector<uint64_t> primes;
  int bit_width = 30;
};

// The `count` largest primes below 2^bit_width, descending, after skipping
// the first `skip` of them (disjoint sets for cross-checks).
inline PrimeSet gen_primes(int bit_width, int count, int skip = 0) {
  if (bit_width != 30 && bit_width != 62) throw std::invalid_argument("gen_primes: bit width must be 30 or 62");
  if (count < 1) throw std::invalid_argument("gen_primes: count must be positive");
  PrimeSet ps{{}, bit_width};
  uint64_t n = (uint64_t{1} << bit_width) - 1;
  int seen = 0;
  for (; static_cast<int>(ps.primes.size()) < count; n -= 2) {
    if (!is_prime(n)) continue;
    if (seen++ >= skip) ps.primes.push_back(n);
  }
  return ps;
}

inline uint64_t reduce(const bigint& n, uint64_t p) {
  bigint r = n % p;
  if (r < 0) r += p;
  return static_cast<uint64_t>(r);
}

// Garner-style incremental CRT; result in [0, prod(primes)).
inline bigint crt_reconstruct(const std::vector<uint64_t>& residues, const std::vector<uint64_t>& primes) {
  if (residues.size() != primes.size() || primes.empty())
    throw std::invalid_argument("crt_reconstruct: residue/prime length mismatch");
  bigint x = residues[0] % primes[0];
  bigint m = primes[0];
  for (size_t i = 1; i < primes.size(); ++i) {
    uint64_t p = primes[i];
    uint64_t xm = reduce(x, p), mm = reduce(m, p);
    uint64_t t = mulmod(submod(residues[i] % p, xm, p), invmod(mm, p), p);
    x += m * t;
    m *= p;
  }
  return x;
}

inline bigint crt_reconstruct(const std::vector<uint64_t>& residues, const PrimeSet& ps) {
  return crt_reconstruct(residues, ps.primes);
}

inline bigint prime_product(const std::vector<uint64_t>& primes) {
  bigint m = 1;
  for (auto p : primes) m *= p;
  return m;
}

}  // namespace gerry
