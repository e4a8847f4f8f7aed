#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "skga/io.hpp"
#include "skga/kmer.hpp"

namespace skga {

// Dense de Bruijn graph over all canonical k-mers of the input, used as a
// correctness oracle and as the memory baseline. Each node carries 8 edge
// presence bits: bits 0-3 are the possible extension bases on the right
// side (in the canonical orientation), bits 4-7 on the left side (base as
// read when traveling leftward, i.e. complemented).
class DenseGraph {
 public:
  using NodeId = uint32_t;
  static constexpr NodeId kNoNode = UINT32_MAX;
  static constexpr uint64_t kEmptyKey = ~uint64_t{0};

  explicit DenseGraph(int k);

  int k() const { return k_; }

  void add_read(std::string_view read);

  NodeId find(uint64_t canon_bits) const;
  uint64_t node_kmer(NodeId id) const { return keys_[id]; }
  uint32_t coverage(NodeId id) const { return cov_[id]; }
  uint8_t edge_bits(NodeId id) const { return edges_[id]; }

  uint64_t node_count() const { return node_count_; }
  size_t capacity() const { return cap_; }

  // Bit cost of the store as laid out: k-mer keys and edge bits over the
  // allocated capacity. The coverage counters are a spectrum extra on top
  // of the minimal layout and are deliberately not counted.
  uint64_t measured_bits() const;

  // Maximal non-branching paths, canonical orientation, deterministic
  // (seeded in ascending k-mer order). Paths shorter than min_len are
  // dropped.
  std::vector<Contig> extract_unitigs(size_t min_len);

  void dump(std::ostream& out) const;

 private:
  NodeId get_or_insert(uint64_t canon_bits);
  size_t slot_of(uint64_t key) const;
  void rehash(size_t new_cap);
  // number of edges on one side, and the single base if exactly one
  int side_edge_count(NodeId id, bool right, uint8_t* base) const;

  int k_;
  size_t cap_ = 0;
  uint64_t node_count_ = 0;
  std::vector<uint64_t> keys_;
  std::vector<uint8_t> edges_;
  std::vector<uint32_t> cov_;
  std::vector<uint8_t> visited_;  // traversal scratch, 2 orientation bits
  WindowScan scan_;
};

DenseGraph build_dense(ReadSource& reads, int k);

}  // namespace skga
