#pragma once

#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <string_view>

#include "skga/io.hpp"

namespace skga {

// Position-dependent substitution error profile: the per-base probability
// grows linearly from rate_5p at read position 0 to rate_3p at the last
// position.
struct ErrorProfile {
  double rate_5p = 0.0;
  double rate_3p = 0.0;

  double rate_at(size_t pos, size_t read_len) const {
    if (read_len <= 1) return rate_5p;
    return rate_5p + (rate_3p - rate_5p) *
                         (static_cast<double>(pos) / static_cast<double>(read_len - 1));
  }
};

// Uniform i.i.d. ACGT string, reproducible from the seed.
std::string random_genome(size_t length, uint64_t seed);

struct SimRead {
  std::string seq;
  size_t origin = 0;  // 0-based position on the forward strand
  bool rc = false;    // drawn from the reverse strand
};

// Shotgun read stream: uniform start positions, uniform strand, per-position
// substitution to a uniformly chosen different base. Deterministic from the
// seed; reset() replays the identical stream.
class ReadSimulator final : public ReadSource {
 public:
  ReadSimulator(std::string genome, size_t read_len, uint64_t n_reads, ErrorProfile profile,
                uint64_t seed);

  void reset() override;
  bool next(std::string& seq) override;
  bool next_read(SimRead& read);

  const std::string& genome() const { return genome_; }

 private:
  std::string genome_;
  size_t read_len_;
  uint64_t n_reads_;
  ErrorProfile profile_;
  uint64_t seed_;
  uint64_t emitted_ = 0;
  std::mt19937_64 rng_;
};

// Streams n_reads simulated reads as FASTA records (">read_<i> pos=<p>
// strand=<+,->"). Returns the number of substituted bases.
uint64_t simulate_to_fasta(std::ostream& out, const std::string& genome, size_t read_len,
                           uint64_t n_reads, ErrorProfile profile, uint64_t seed,
                           bool fastq = false);

}  // namespace skga
