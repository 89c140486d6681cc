#pragma once

// Versioned binary snapshot of a sweep taken at a column boundary.
//
// Layout, all little-endian:
//   "GRYCKPT\0", u32 version, u32 word bytes, u64 prime, u32 W, u32 column,
//   u32 cell, u32 kink, u32 panel, u32 side, u64 capacity, u8 areas,
//   u64 unblocked words, u64 blocked words, u64 sap words,
//   unblocked[], blocked[], sap[] (each word at the stated width),
//   u64 FNV-1a of every byte before it.

#include "gerry/transfer.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gerry {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr uint32_t checkpoint_version = 1;

namespace ckpt_detail {

struct Writer {
  std::vector<unsigned char> buf;
  void put(uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
};

struct Reader {
  const std::vector<unsigned char>& buf;
  size_t at = 0;
  uint64_t get(int bytes) {
    if (at + bytes > buf.size()) throw CheckpointError("checkpoint: truncated file");
    uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= uint64_t(buf[at++]) << (8 * i);
    return v;
  }
};

inline uint64_t fnv1a(const unsigned char* p, size_t n) {
  uint64_t h = 1469598103934665603ull;
  for (size_t i = 0; i < n; ++i) h = (h ^ p[i]) * 1099511628211ull;
  return h;
}

constexpr char magic[8] = {'G', 'R', 'Y', 'C', 'K', 'P', 'T', '\0'};

}  // namespace ckpt_detail

template <class Word>
void save_checkpoint(const Sweep<Word>& sw, const std::filesystem::path& path) {
  const auto& t = sw.table();
  if (t.cell != 0) throw std::logic_error("checkpoint: only at column boundaries");
  ckpt_detail::Writer w;
  for (char c : ckpt_detail::magic) w.buf.push_back(static_cast<unsigned char>(c));
  w.put(checkpoint_version, 4);
  w.put(sizeof(Word), 4);
  w.put(t.prime, 8);
  w.put(t.width, 4);
  w.put(t.column, 4);
  w.put(t.cell, 4);
  w.put(t.kink, 4);
  w.put(sw.run().panel, 4);
  w.put(sw.run().side, 4);
  w.put(t.cap, 8);
  w.put(t.areas ? 1 : 0, 1);
  w.put(t.unblocked.size(), 8);
  w.put(t.blocked.size(), 8);
  w.put(t.sap.size(), 8);
  for (auto* v : {&t.unblocked, &t.blocked, &t.sap})
    for (Word x : *v) w.put(x, sizeof(Word));
  w.put(ckpt_detail::fnv1a(w.buf.data(), w.buf.size()), 8);

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("checkpoint: cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(w.buf.data()), static_cast<std::streamsize>(w.buf.size()));
    if (!out) throw CheckpointError("checkpoint: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// Restores a snapshot into a freshly constructed sweep of the same run.
template <class Word>
void load_checkpoint(Sweep<Word>& sw, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 16) throw CheckpointError("checkpoint: truncated file");
  uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) stored |= uint64_t(buf[buf.size() - 8 + i]) << (8 * i);
  if (stored != ckpt_detail::fnv1a(buf.data(), buf.size() - 8)) throw CheckpointError("checkpoint: checksum mismatch");
  for (int i = 0; i < 8; ++i)
    if (buf[i] != static_cast<unsigned char>(ckpt_detail::magic[i])) throw CheckpointError("checkpoint: bad magic");

  ckpt_detail::Reader r{buf, 8};
  auto& t = sw.table();
  auto expect = [](bool ok, const char* what) {
    if (!ok) throw CheckpointError(std::string("checkpoint: incompatible ") + what);
  };
  expect(r.get(4) == checkpoint_version, "format version");
  expect(r.get(4) == sizeof(Word), "word size");
  expect(r.get(8) == t.prime, "prime");
  expect(r.get(4) == static_cast<uint64_t>(t.width), "width");
  uint64_t column = r.get(4), cell = r.get(4), kink = r.get(4);
  expect(r.get(4) == static_cast<uint64_t>(sw.run().panel), "panel");
  expect(r.get(4) == static_cast<uint64_t>(sw.run().side), "side");
  expect(r.get(8) == t.cap, "capacity");
  expect(r.get(1) == (t.areas ? 1u : 0u), "mode");
  expect(r.get(8) == t.unblocked.size(), "unblocked size");
  expect(r.get(8) == t.blocked.size(), "blocked size");
  expect(r.get(8) == t.sap.size(), "sap size");
  expect(cell == 0 && kink == static_cast<uint64_t>(t.width), "sweep position");
  expect(column <= static_cast<uint64_t>(sw.run().columns), "column");
  for (auto* v : {&t.unblocked, &t.blocked, &t.sap})
    for (Word& x : *v) {
      x = static_cast<Word>(r.get(sizeof(Word)));
      expect(x < t.prime, "residue");
    }
  t.column = static_cast<int>(column);
  t.cell = 0;
  t.kink = t.width;
  t.finished = false;
}

}  // namespace gerry
