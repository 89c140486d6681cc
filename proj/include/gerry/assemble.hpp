#pragma once

// Multi-prime orchestration of the two panel runs and assembly of the
// gerrymander quantities from their CRT-reconstructed totals.

#include "gerry/checkpoint.hpp"
#include "gerry/modarith.hpp"
#include "gerry/transfer.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gerry {

enum class Mode { Polynomial, Scalar };

inline const char* mode_name(Mode m) { return m == Mode::Polynomial ? "polynomial" : "scalar"; }

struct ResourceError : std::runtime_error {
  size_t required, available;
  ResourceError(size_t req, size_t avail)
      : std::runtime_error("memory budget: need " + std::to_string(req) + " bytes, budget " + std::to_string(avail)),
        required(req), available(avail) {}
};

struct Interrupted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr size_t default_memory_budget = size_t{3} << 30;

struct EnumOptions {
  int threads = 1;
  int prime_skip = 0;       // skip this many of the largest primes (disjoint sets)
  int prime_count = 0;      // 0: a-priori bound; otherwise a fixed initial count
  bool verify_extra_prime = true;
  int max_degree = -1;      // polynomial mode: drop areas above this (-1 keeps all)
  size_t memory_budget = default_memory_budget;
  std::filesystem::path checkpoint_dir;  // empty disables checkpoints
  int stop_after_columns = -1;           // test hook: abandon jobs after this many new columns
};

struct RunInfo {
  int bit_width = 30;
  std::vector<uint64_t> primes;
  int initial_primes = 0;
  bool stable = true;
  size_t capacity = 0;
  int jobs = 0;
  size_t peak_bytes = 0;
  double wall_seconds = 0;
  double cpu_seconds = 0;
};

struct PanelTotal {
  int L = 0;
  Mode mode = Mode::Polynomial;
  std::vector<bigint> p;  // p[k], area k; scalar mode: p[0] is the total
  RunInfo info;
};

namespace assemble_detail {

inline int bit_width(Mode m) { return m == Mode::Polynomial ? 30 : 62; }

inline std::vector<PanelRun> runs_for(int L) {
  std::vector<PanelRun> v;
  if (L >= 2) v.push_back(panel_12_run(L));
  if (L >= 3) v.push_back(panel_34_run(L));
  return v;
}

inline std::filesystem::path checkpoint_path(const EnumOptions& o, const PanelRun& r, Mode m, size_t cap,
                                             uint64_t prime) {
  return o.checkpoint_dir / ("L" + std::to_string(r.side) + "_" + mode_name(m) + "_panel" + std::to_string(r.panel) +
                             "_cap" + std::to_string(cap) + "_p" + std::to_string(prime) + ".ckpt");
}

template <class Word>
std::vector<uint64_t> run_job(const PanelRun& run, Mode m, size_t cap, uint64_t prime, const EnumOptions& o) {
  Sweep<Word> sw(run, prime, cap, m == Mode::Polynomial);
  std::filesystem::path ck;
  if (!o.checkpoint_dir.empty()) {
    ck = checkpoint_path(o, run, m, cap, prime);
    if (std::filesystem::exists(ck)) load_checkpoint(sw, ck);
  }
  int fresh = 0;
  while (!sw.swept()) {
    if (o.stop_after_columns >= 0 && fresh >= o.stop_after_columns) throw Interrupted("enumeration interrupted");
    sw.column();
    ++fresh;
    if (!ck.empty()) save_checkpoint(sw, ck);
  }
  const auto& sap = sw.finish();
  return {sap.begin(), sap.end()};
}

// Runs every (run, prime) job on a bounded pool; result[job] is fixed by
// job index, so the output never depends on scheduling.
inline std::vector<std::vector<uint64_t>> run_jobs(const std::vector<PanelRun>& runs, Mode m, size_t cap,
                                                   const std::vector<uint64_t>& primes, const EnumOptions& o) {
  struct Job {
    const PanelRun* run;
    uint64_t prime;
  };
  std::vector<Job> jobs;
  for (uint64_t p : primes)
    for (const auto& r : runs) jobs.push_back({&r, p});
  std::vector<std::vector<uint64_t>> out(jobs.size());
  std::atomic<size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    for (;;) {
      size_t j = next++;
      if (j >= jobs.size()) return;
      try {
        size_t c = m == Mode::Polynomial ? std::min<size_t>(cap, jobs[j].run->max_area + 1) : 1;
        out[j] = m == Mode::Polynomial ? run_job<uint32_t>(*jobs[j].run, m, c, jobs[j].prime, o)
                                       : run_job<uint64_t>(*jobs[j].run, m, c, jobs[j].prime, o);
      } catch (...) {
        std::lock_guard lk(err_mu);
        if (!err) err = std::current_exception();
        next = jobs.size();
      }
    }
  };
  int nt = std::max(1, std::min<int>(o.threads, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
  return out;
}

}  // namespace assemble_detail

inline size_t capacity_for(int L, Mode m, int max_degree) {
  if (m == Mode::Scalar) return 1;
  int full = L * (L - 1);
  return static_cast<size_t>((max_degree < 0 ? full : std::min(full, max_degree)) + 1);
}

// Bytes needed by the concurrently running jobs.
inline size_t memory_estimate(int L, Mode m, const EnumOptions& o) {
  if (L < 2) return 0;
  size_t word = m == Mode::Polynomial ? 4 : 8;
  size_t cap = capacity_for(L, m, o.max_degree);
  auto runs = assemble_detail::runs_for(L);
  size_t per = 0;
  for (auto& r : runs) per = std::max(per, table_bytes(r.width, std::min<size_t>(cap, r.max_area + 1), word));
  return per * static_cast<size_t>(std::max(1, o.threads));
}

// p_{L,k} = run_panel_12 + run_panel_34, reconstructed exactly.
inline PanelTotal panel_total(int L, Mode m, const EnumOptions& o = {}) {
  if (L < 1) throw std::invalid_argument("panel_total: L must be positive");
  auto t0 = std::chrono::steady_clock::now();
  std::clock_t c0 = std::clock();
  PanelTotal res;
  res.L = L;
  res.mode = m;
  res.info.bit_width = assemble_detail::bit_width(m);
  size_t cap = capacity_for(L, m, o.max_degree);
  res.info.capacity = cap;
  res.p.assign(cap, 0);
  auto runs = assemble_detail::runs_for(L);
  if (runs.empty()) return res;

  size_t need = memory_estimate(L, m, o);
  res.info.peak_bytes = need;
  if (need > o.memory_budget) throw ResourceError(need, o.memory_budget);

  const int bw = res.info.bit_width;
  int k = o.prime_count > 0 ? o.prime_count : (L * L + bw - 1) / bw + 1;
  res.info.initial_primes = k;
  int total = k + (o.verify_extra_prime ? 1 : 0);
  auto primes = gen_primes(bw, total, o.prime_skip).primes;
  auto residues = assemble_detail::run_jobs(runs, m, cap, primes, o);
  const size_t nr = runs.size();

  auto reconstruct = [&](size_t np) {
    std::vector<bigint> v(cap);
    std::vector<uint64_t> rs(np);
    for (size_t c = 0; c < cap; ++c) {
      for (size_t i = 0; i < np; ++i) {
        uint64_t s = 0;
        for (size_t j = 0; j < nr; ++j) {
          const auto& sap = residues[i * nr + j];
          if (c < sap.size()) s = addmod(s, sap[c], primes[i]);
        }
        rs[i] = s;
      }
      std::vector<uint64_t> ps(primes.begin(), primes.begin() + np);
      v[c] = crt_reconstruct(rs, ps);
    }
    return v;
  };

  auto best = reconstruct(primes.size());
  if (o.verify_extra_prime) {
    // grow the prime set until one more prime no longer changes anything
    for (int guard = 0; reconstruct(primes.size() - 1) != best; ++guard) {
      if (guard >= 8) {
        res.info.stable = false;
        break;
      }
      auto more = gen_primes(bw, 1, o.prime_skip + static_cast<int>(primes.size())).primes;
      auto extra = assemble_detail::run_jobs(runs, m, cap, more, o);
      primes.push_back(more[0]);
      for (auto& e : extra) residues.push_back(std::move(e));
      best = reconstruct(primes.size());
    }
  }
  res.p = std::move(best);
  res.info.primes = primes;
  res.info.jobs = static_cast<int>(residues.size());
  res.info.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.info.cpu_seconds = double(std::clock() - c0) / CLOCKS_PER_SEC;
  return res;
}

struct GerrymanderPolynomial {
  int L = 0;
  std::vector<bigint> g;  // g[k], k = 0..L^2 (g[0] = g[L^2] = 0)
};

inline GerrymanderPolynomial gerrymander_polynomial(const PanelTotal& pt) {
  if (pt.mode != Mode::Polynomial) throw std::invalid_argument("gerrymander_polynomial: needs polynomial mode");
  const int n = pt.L * pt.L;
  // the grey region never exceeds L(L-1) cells
  if (pt.L >= 2 && static_cast<int>(pt.p.size()) < n - pt.L + 1) {
    // truncated totals only determine coefficients up to their capacity
    throw std::invalid_argument("gerrymander_polynomial: panel total truncated");
  }
  GerrymanderPolynomial gp{pt.L, std::vector<bigint>(n + 1, 0)};
  auto at = [&](int k) -> bigint { return k < static_cast<int>(pt.p.size()) ? pt.p[k] : bigint(0); };
  for (int k = 1; k < n; ++k) gp.g[k] = at(k) + at(n - k);
  return gp;
}

inline GerrymanderPolynomial gerrymander_polynomial(int L, const EnumOptions& o = {}) {
  EnumOptions full = o;
  full.max_degree = -1;
  return gerrymander_polynomial(panel_total(L, Mode::Polynomial, full));
}

// g_{L, floor(L^2/2)}; only areas up to ceil(L^2/2) are tracked.
inline bigint generalised_gerrymander(int L, const EnumOptions& o = {}, RunInfo* info = nullptr) {
  if (L < 2) return 0;
  EnumOptions t = o;
  const int n = L * L, i = n / 2;
  t.max_degree = n - i;
  auto pt = panel_total(L, Mode::Polynomial, t);
  if (info) *info = pt.info;
  auto at = [&](int k) -> bigint { return k < static_cast<int>(pt.p.size()) ? pt.p[k] : bigint(0); };
  return at(i) + at(n - i);
}

// A348456: ways to split a 2L x 2L board into two equal-area polyominoes.
inline bigint gerrymander(int L, const EnumOptions& o = {}, RunInfo* info = nullptr) {
  bigint g = generalised_gerrymander(2 * L, o, info);
  if (g % 2 != 0) throw ConsistencyError("gerrymander: central coefficient is odd");
  return g / 2;
}

// G_L(1)/2 from the scalar pipeline.
inline bigint partition_count(int L, const EnumOptions& o = {}, RunInfo* info = nullptr) {
  if (L < 2) return 0;
  auto pt = panel_total(L, Mode::Scalar, o);
  if (info) *info = pt.info;
  return pt.p[0];
}

}  // namespace gerry
