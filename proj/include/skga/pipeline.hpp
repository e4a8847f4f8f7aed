#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "skga/io.hpp"
#include "skga/sparse_graph.hpp"

namespace skga {

// Round-1 candidate node set: canonical k-mer -> preliminary coverage.
class KmerCountTable {
 public:
  static constexpr uint64_t kEmptyKey = ~uint64_t{0};

  KmerCountTable() = default;

  // Returns a pointer to the count if the k-mer is present, else nullptr.
  uint32_t* find(uint64_t canon_bits);
  const uint32_t* find(uint64_t canon_bits) const;
  void insert(uint64_t canon_bits, uint32_t count);

  uint64_t size() const { return size_; }
  uint64_t measured_bits() const;

  // Drops entries with count < min_count, returns how many were dropped.
  uint64_t filter(uint32_t min_count);

  std::vector<uint64_t> kmers() const;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (size_t i = 0; i < cap_; ++i)
      if (keys_[i] != kEmptyKey) fn(keys_[i], counts_[i]);
  }

 private:
  void grow();
  size_t cap_ = 0;
  uint64_t size_ = 0;
  std::vector<uint64_t> keys_;
  std::vector<uint32_t> counts_;
};

struct StageCounters {
  uint64_t reads = 0;
  uint64_t bases = 0;
  uint64_t round1_nodes_selected = 0;
  uint64_t round1_hits = 0;
  uint64_t nodes_filtered = 0;
  uint64_t round2_hits = 0;
  uint64_t link_events = 0;
  uint64_t links_built = 0;  // live directed link records after round 2
  uint64_t chain_breaks = 0; // consecutive hits more than g apart (filtered gap)
  uint64_t weak_links_removed = 0;
  uint64_t isolated_nodes_removed = 0;
  uint64_t tips_removed = 0;
  uint64_t bubbles_removed = 0;
  uint64_t contigs = 0;
  uint64_t contigs_dropped_short = 0;
  uint64_t graph_peak_bits = 0;
  uint64_t graph_final_bits = 0;
  uint64_t final_nodes = 0;
  uint64_t final_links = 0;
};

// Round 1 of the paper's two-round construction: scan each read left to
// right; within the window of the next g k-mer positions, jump to the first
// one already selected as a node (bumping its coverage), otherwise select a
// new node g past the previous one. Along every error-free read the
// selected nodes end up at most g apart.
KmerCountTable round1_select_nodes(ReadSource& reads, const GraphParams& params,
                                   StageCounters& counters);

// Drops candidates below min_node_cov; no-op when min_node_cov <= 1.
uint64_t filter_low_coverage_nodes(KmerCountTable& nodes, uint32_t min_node_cov);

// Exact-size link-capable store over the surviving candidates, coverage
// reset to zero for the round-2 recount.
SparseGraph build_graph(const KmerCountTable& nodes, const GraphParams& params);

// Round 2: rescan all reads against the fixed node set, recount coverage
// and record a link between every pair of consecutive hits at distance
// <= g. A wider gap (a filtered node) just breaks the chain. Thread-safe
// for threads > 1; the merged result does not depend on scheduling.
void round2_build_links(ReadSource& reads, SparseGraph& graph, StageCounters& counters,
                        int threads = 1);

// Removes link pairs with count < min_link_cov, then nodes left with no
// links and coverage < min_node_cov. Returns removed pairs.
uint64_t remove_weak_links(SparseGraph& graph, uint32_t min_link_cov,
                           uint32_t min_node_cov, uint64_t* isolated_removed = nullptr);

// Breadth-first cleanup of the remaining spurious structures: from every
// branching side, each branch is walked up to tip_depth_bases accumulated
// label bases. A branch that dead-ends inside the limit is a tip; two
// branches reconverging on one node form a bubble. The branch with the
// smaller summed link count loses and is removed. Repeats until stable.
std::pair<uint64_t, uint64_t> remove_tips_and_bubbles(SparseGraph& graph,
                                                      uint32_t tip_depth_bases);

// Unambiguous-path traversal into contigs: grows from every unvisited node
// while both the current side and the far entry side have exactly one live
// link, emitting each contig in its lexically smaller orientation, seeds
// taken in ascending k-mer order.
std::vector<Contig> extract_contigs(SparseGraph& graph, size_t min_contig_len,
                                    StageCounters* counters = nullptr);

struct AssembleOptions {
  int threads = 1;
  size_t min_contig_len = 100;
  std::ostream* log = nullptr;        // stage=... key=value lines
  SparseGraph* keep_graph = nullptr;  // receives the final graph if set
};

struct AssembleResult {
  std::vector<Contig> contigs;
  StageCounters counters;
};

AssembleResult assemble(ReadSource& reads, const GraphParams& params,
                        const AssembleOptions& options = {});

}  // namespace skga
