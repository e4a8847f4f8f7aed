#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace skga {

// k is restricted to odd values in [15, 31]: a k-mer always fits one 64-bit
// word with 2 bits per base, and odd k rules out self-reverse-complement
// palindromes, so a canonical orientation is always well defined.
inline constexpr int kMinK = 15;
inline constexpr int kMaxK = 31;

inline constexpr uint8_t kInvalidBase = 4;

// A/C/G/T (case-insensitive) -> 0/1/2/3, everything else -> kInvalidBase.
extern const std::array<uint8_t, 256> kBaseCode;

inline constexpr char kBaseChar[4] = {'A', 'C', 'G', 'T'};

inline uint8_t base_code(char c) { return kBaseCode[static_cast<uint8_t>(c)]; }

// Complement swaps A<->T and C<->G, which is bitwise negation in this code.
inline uint8_t complement_code(uint8_t b) { return b ^ 3u; }

inline bool valid_k(int k) { return k >= kMinK && k <= kMaxK && (k & 1) == 1; }

// Low 2k bits hold the k-mer, earlier base at the higher position, so the
// numeric order of two packed k-mers equals the lexical order of their
// strings under A<C<G<T.
inline uint64_t kmer_mask(int k) { return (uint64_t{1} << (2 * k)) - 1; }

// Reverse complement of a packed k-mer: complement everything, reverse the
// 32 base slots of the word, then drop the 32-k slots of padding.
inline uint64_t revcomp_bits(uint64_t v, int k) {
  v = ~v;
  v = ((v >> 2) & 0x3333333333333333ull) | ((v & 0x3333333333333333ull) << 2);
  v = ((v >> 4) & 0x0f0f0f0f0f0f0f0full) | ((v & 0x0f0f0f0f0f0f0f0full) << 4);
  v = __builtin_bswap64(v);
  return v >> (64 - 2 * k);
}

struct CanonicalKmer {
  uint64_t bits = 0;     // min(kmer, revcomp(kmer))
  bool flipped = false;  // true if bits holds the reverse complement of the observed k-mer
};

inline CanonicalKmer canonicalize(uint64_t bits, int k) {
  const uint64_t rc = revcomp_bits(bits, k);
  return rc < bits ? CanonicalKmer{rc, true} : CanonicalKmer{bits, false};
}

std::string decode_kmer(uint64_t bits, int k);

// Returns false if s contains a non-ACGT character or has the wrong length.
bool encode_kmer(std::string_view s, int k, uint64_t* bits);

// One valid window of a read: position, canonical bits, orientation flag.
struct KmerWindow {
  size_t pos = 0;
  uint64_t canon = 0;
  bool flipped = false;
};

// Canonical k-mers of every window lying fully inside a maximal ACGT-only
// run of the read. Windows touching other characters are skipped; reads
// shorter than k yield nothing.
std::vector<KmerWindow> kmer_windows(std::string_view read, int k);

// Per-position window scan used by the graph construction passes. Window i
// covers read[i, i+k); valid[i] == 0 where the window touches a non-ACGT
// character. Buffers are reused across reads.
class WindowScan {
 public:
  void compute(std::string_view read, int k);

  size_t windows() const { return n_; }
  bool valid(size_t i) const { return valid_[i] != 0; }
  uint64_t canon(size_t i) const { return canon_[i]; }
  bool flipped(size_t i) const { return flip_[i] != 0; }

 private:
  std::vector<uint64_t> canon_;
  std::vector<uint8_t> flip_;
  std::vector<uint8_t> valid_;
  size_t n_ = 0;
};

// Packed base run used for link labels: up to 31 bases, same layout as a
// packed k-mer (first base at the highest occupied position).
std::string decode_bases(uint64_t bits, int len);

// Reverse complement of a plain base string; non-ACGT characters map to 'N'.
std::string revcomp_str(std::string_view s);

}  // namespace skga
