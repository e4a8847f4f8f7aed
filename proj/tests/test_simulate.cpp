#include <doctest.h>

#include <array>
#include <sstream>

#include "skga/simulate.hpp"
#include "skga/kmer.hpp"

using namespace skga;

TEST_CASE("random genomes are reproducible and balanced") {
  CHECK(random_genome(100, 5) == random_genome(100, 5));
  CHECK(random_genome(100, 5) != random_genome(100, 6));
  const std::string one = random_genome(1, 5);
  CHECK(one.find_first_not_of("ACGT") == std::string::npos);
  CHECK_THROWS_AS(random_genome(0, 1), std::invalid_argument);

  const std::string big = random_genome(1000000, 77);
  std::array<uint64_t, 4> counts{};
  for (char c : big) ++counts[base_code(c)];
  for (uint64_t n : counts) {
    CHECK(n > 240000);
    CHECK(n < 260000);
  }
}

TEST_CASE("zero error rate yields exact substrings") {
  const std::string genome = random_genome(10000, 9);
  const std::string rc = revcomp_str(genome);
  ReadSimulator sim(genome, 100, 1000, {0.0, 0.0}, 3);
  SimRead read;
  size_t forward = 0;
  while (sim.next_read(read)) {
    REQUIRE(read.seq.size() == 100);
    if (read.rc) {
      CHECK(rc.find(read.seq) != std::string::npos);
    } else {
      ++forward;
      CHECK(genome.compare(read.origin, 100, read.seq) == 0);
    }
  }
  CHECK(forward > 400);
  CHECK(forward < 600);
}

TEST_CASE("error profile mean substitutions per read") {
  // rate grows 0.5% -> 2%; linear interpolation gives 1.25 expected
  // substitutions on a 100 bp read
  const std::string genome = random_genome(5000, 10);
  std::ostringstream sink;
  const uint64_t n_reads = 200000;
  const uint64_t subs = simulate_to_fasta(sink, genome, 100, n_reads, {0.005, 0.02}, 11);
  const double mean = static_cast<double>(subs) / static_cast<double>(n_reads);
  CHECK(mean == doctest::Approx(1.25).epsilon(0.02));
}

TEST_CASE("strand balance") {
  const std::string genome = random_genome(2000, 12);
  ReadSimulator sim(genome, 100, 100000, {0.0, 0.0}, 13);
  SimRead read;
  uint64_t fwd = 0, total = 0;
  while (sim.next_read(read)) {
    ++total;
    if (!read.rc) ++fwd;
  }
  const double frac = static_cast<double>(fwd) / static_cast<double>(total);
  CHECK(frac > 0.49);
  CHECK(frac < 0.51);
}

TEST_CASE("substitution frequency slope matches the profile") {
  const std::string genome = random_genome(1000, 14);
  ReadSimulator sim(genome, 100, 1000000, {0.005, 0.02}, 15);
  SimRead read;
  uint64_t err_first = 0, err_last = 0;
  const std::string rc_genome = revcomp_str(genome);
  while (sim.next_read(read)) {
    const char* truth = read.rc ? rc_genome.data() + (genome.size() - 100 - read.origin)
                                : genome.data() + read.origin;
    if (read.seq[0] != truth[0]) ++err_first;
    if (read.seq[99] != truth[99]) ++err_last;
  }
  const double ratio = static_cast<double>(err_last) / static_cast<double>(err_first);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.10));
}

TEST_CASE("the stream replays identically after reset") {
  const std::string genome = random_genome(3000, 16);
  ReadSimulator sim(genome, 100, 50, {0.01, 0.01}, 17);
  std::vector<std::string> first, second;
  std::string seq;
  while (sim.next(seq)) first.push_back(seq);
  sim.reset();
  while (sim.next(seq)) second.push_back(seq);
  CHECK(first == second);
  REQUIRE(first.size() == 50);

  // and matches the FASTA writer stream for the same seed
  std::ostringstream fasta;
  simulate_to_fasta(fasta, genome, 100, 50, {0.01, 0.01}, 17);
  std::istringstream in(fasta.str());
  std::string line;
  size_t i = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '>') continue;
    CHECK(line == first[i++]);
  }
  CHECK(i == 50);
}

TEST_CASE("read length must fit the genome") {
  CHECK_THROWS_AS(ReadSimulator(random_genome(50, 1), 100, 10, {0, 0}, 1),
                  std::invalid_argument);
}
