#include "skga/simulate.hpp"

#include <stdexcept>

#include "skga/kmer.hpp"

namespace skga {

namespace {

// mt19937_64 output is pinned by the standard; the library distributions are
// not, so the mappings below keep streams identical across toolchains.
inline uint64_t bounded(std::mt19937_64& rng, uint64_t n) {
  return static_cast<uint64_t>((static_cast<__uint128_t>(rng()) * n) >> 64);
}

inline double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void make_read(std::mt19937_64& rng, const std::string& genome, size_t read_len,
               const ErrorProfile& profile, SimRead& read, uint64_t* substitutions) {
  const size_t span = genome.size() - read_len + 1;
  read.origin = static_cast<size_t>(bounded(rng, span));
  read.rc = (rng() & 1) != 0;
  std::string_view src(genome.data() + read.origin, read_len);
  read.seq = read.rc ? revcomp_str(src) : std::string(src);
  const bool flat = profile.rate_5p == profile.rate_3p;
  if (flat && profile.rate_5p <= 0.0) return;
  for (size_t i = 0; i < read_len; ++i) {
    const double r = profile.rate_at(i, read_len);
    if (r > 0.0 && unit_double(rng) < r) {
      const uint8_t old = base_code(read.seq[i]);
      const uint8_t sub = static_cast<uint8_t>((old + 1 + bounded(rng, 3)) & 3);
      read.seq[i] = kBaseChar[sub];
      if (substitutions) ++*substitutions;
    }
  }
}

}  // namespace

std::string random_genome(size_t length, uint64_t seed) {
  if (length < 1) throw std::invalid_argument("genome length must be >= 1");
  std::mt19937_64 rng(seed);
  std::string s(length, 'A');
  for (auto& c : s) c = kBaseChar[bounded(rng, 4)];
  return s;
}

ReadSimulator::ReadSimulator(std::string genome, size_t read_len, uint64_t n_reads,
                             ErrorProfile profile, uint64_t seed)
    : genome_(std::move(genome)),
      read_len_(read_len),
      n_reads_(n_reads),
      profile_(profile),
      seed_(seed),
      rng_(seed) {
  if (read_len_ < 1 || read_len_ > genome_.size())
    throw std::invalid_argument("read length must be in [1, genome length]");
}

void ReadSimulator::reset() {
  emitted_ = 0;
  rng_.seed(seed_);
}

bool ReadSimulator::next(std::string& seq) {
  SimRead read;
  if (!next_read(read)) return false;
  seq = std::move(read.seq);
  return true;
}

bool ReadSimulator::next_read(SimRead& read) {
  if (emitted_ >= n_reads_) return false;
  make_read(rng_, genome_, read_len_, profile_, read, nullptr);
  ++emitted_;
  return true;
}

uint64_t simulate_to_fasta(std::ostream& out, const std::string& genome, size_t read_len,
                           uint64_t n_reads, ErrorProfile profile, uint64_t seed, bool fastq) {
  if (read_len < 1 || read_len > genome.size())
    throw std::invalid_argument("read length must be in [1, genome length]");
  std::mt19937_64 rng(seed);
  uint64_t substitutions = 0;
  SimRead read;
  std::string qual(read_len, 'I');
  for (uint64_t i = 0; i < n_reads; ++i) {
    make_read(rng, genome, read_len, profile, read, &substitutions);
    out << (fastq ? '@' : '>') << "read_" << i << " pos=" << read.origin << " strand="
        << (read.rc ? '-' : '+') << '\n';
    out << read.seq << '\n';
    if (fastq) out << "+\n" << qual << '\n';
  }
  return substitutions;
}

}  // namespace skga
