#include "skga/kmer.hpp"

namespace skga {

namespace {

constexpr std::array<uint8_t, 256> make_base_table() {
  std::array<uint8_t, 256> t{};
  for (auto& v : t) v = kInvalidBase;
  t['A'] = 0; t['a'] = 0;
  t['C'] = 1; t['c'] = 1;
  t['G'] = 2; t['g'] = 2;
  t['T'] = 3; t['t'] = 3;
  return t;
}

}  // namespace

const std::array<uint8_t, 256> kBaseCode = make_base_table();

std::string decode_kmer(uint64_t bits, int k) { return decode_bases(bits, k); }

std::string decode_bases(uint64_t bits, int len) {
  std::string s(static_cast<size_t>(len), ' ');
  for (int i = len - 1; i >= 0; --i) {
    s[static_cast<size_t>(i)] = kBaseChar[bits & 3u];
    bits >>= 2;
  }
  return s;
}

std::string revcomp_str(std::string_view s) {
  std::string out(s.size(), 'N');
  for (size_t i = 0; i < s.size(); ++i) {
    const uint8_t b = base_code(s[s.size() - 1 - i]);
    if (b != kInvalidBase) out[i] = kBaseChar[complement_code(b)];
  }
  return out;
}

bool encode_kmer(std::string_view s, int k, uint64_t* bits) {
  if (static_cast<int>(s.size()) != k) return false;
  uint64_t v = 0;
  for (char c : s) {
    const uint8_t b = base_code(c);
    if (b == kInvalidBase) return false;
    v = (v << 2) | b;
  }
  *bits = v;
  return true;
}

std::vector<KmerWindow> kmer_windows(std::string_view read, int k) {
  std::vector<KmerWindow> out;
  if (static_cast<int>(read.size()) < k) return out;
  WindowScan scan;
  scan.compute(read, k);
  for (size_t i = 0; i < scan.windows(); ++i) {
    if (scan.valid(i)) out.push_back({i, scan.canon(i), scan.flipped(i)});
  }
  return out;
}

void WindowScan::compute(std::string_view read, int k) {
  n_ = read.size() >= static_cast<size_t>(k) ? read.size() - k + 1 : 0;
  if (canon_.size() < n_) {
    canon_.resize(n_);
    flip_.resize(n_);
    valid_.resize(n_);
  }
  if (n_ == 0) return;

  const uint64_t mask = kmer_mask(k);
  const int rc_shift = 2 * (k - 1);
  uint64_t fwd = 0;
  uint64_t rc = 0;
  size_t run = 0;  // valid bases ending at the current position
  for (size_t i = 0; i < read.size(); ++i) {
    const uint8_t b = base_code(read[i]);
    if (b == kInvalidBase) {
      run = 0;
    } else {
      fwd = ((fwd << 2) | b) & mask;
      rc = (rc >> 2) | (uint64_t{complement_code(b)} << rc_shift);
      ++run;
    }
    if (i + 1 >= static_cast<size_t>(k)) {
      const size_t w = i + 1 - k;
      if (run >= static_cast<size_t>(k)) {
        const bool flip = rc < fwd;
        canon_[w] = flip ? rc : fwd;
        flip_[w] = flip;
        valid_[w] = 1;
      } else {
        valid_[w] = 0;
      }
    }
  }
}

}  // namespace skga
