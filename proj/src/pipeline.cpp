#include "skga/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <mutex>
#include <thread>
#include <unordered_map>

namespace skga {

namespace {

inline uint64_t hash64(uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

constexpr size_t kNoPos = SIZE_MAX;

}  // namespace

uint32_t* KmerCountTable::find(uint64_t canon_bits) {
  if (cap_ == 0) return nullptr;
  size_t i = hash64(canon_bits) & (cap_ - 1);
  while (true) {
    if (keys_[i] == kEmptyKey) return nullptr;
    if (keys_[i] == canon_bits) return &counts_[i];
    i = (i + 1) & (cap_ - 1);
  }
}

const uint32_t* KmerCountTable::find(uint64_t canon_bits) const {
  return const_cast<KmerCountTable*>(this)->find(canon_bits);
}

void KmerCountTable::grow() {
  const size_t new_cap = cap_ ? cap_ * 2 : (1u << 14);
  std::vector<uint64_t> old_keys = std::move(keys_);
  std::vector<uint32_t> old_counts = std::move(counts_);
  const size_t old_cap = cap_;
  cap_ = new_cap;
  keys_.assign(cap_, kEmptyKey);
  counts_.assign(cap_, 0);
  for (size_t i = 0; i < old_cap; ++i) {
    if (old_keys[i] == kEmptyKey) continue;
    size_t j = hash64(old_keys[i]) & (cap_ - 1);
    while (keys_[j] != kEmptyKey) j = (j + 1) & (cap_ - 1);
    keys_[j] = old_keys[i];
    counts_[j] = old_counts[i];
  }
}

void KmerCountTable::insert(uint64_t canon_bits, uint32_t count) {
  if ((size_ + 1) * 5 > cap_ * 4) grow();
  size_t i = hash64(canon_bits) & (cap_ - 1);
  while (keys_[i] != kEmptyKey) {
    if (keys_[i] == canon_bits) {
      counts_[i] += count;
      return;
    }
    i = (i + 1) & (cap_ - 1);
  }
  keys_[i] = canon_bits;
  counts_[i] = count;
  ++size_;
}

uint64_t KmerCountTable::measured_bits() const {
  return (keys_.capacity() * sizeof(uint64_t) + counts_.capacity() * sizeof(uint32_t)) * 8;
}

uint64_t KmerCountTable::filter(uint32_t min_count) {
  if (min_count <= 1 || size_ == 0) return 0;
  uint64_t removed = 0;
  std::vector<uint64_t> old_keys = std::move(keys_);
  std::vector<uint32_t> old_counts = std::move(counts_);
  const size_t old_cap = cap_;
  keys_.assign(cap_, kEmptyKey);
  counts_.assign(cap_, 0);
  size_ = 0;
  for (size_t i = 0; i < old_cap; ++i) {
    if (old_keys[i] == kEmptyKey) continue;
    if (old_counts[i] < min_count) {
      ++removed;
      continue;
    }
    size_t j = hash64(old_keys[i]) & (cap_ - 1);
    while (keys_[j] != kEmptyKey) j = (j + 1) & (cap_ - 1);
    keys_[j] = old_keys[i];
    counts_[j] = old_counts[i];
    ++size_;
  }
  return removed;
}

std::vector<uint64_t> KmerCountTable::kmers() const {
  std::vector<uint64_t> out;
  out.reserve(size_);
  for (size_t i = 0; i < cap_; ++i)
    if (keys_[i] != kEmptyKey) out.push_back(keys_[i]);
  return out;
}

// --- round 1 -------------------------------------------------------------

namespace {

// Applies the window rule to one run [s, e] of valid windows.
void round1_scan_segment(KmerCountTable& nodes, const WindowScan& scan, size_t s, size_t e,
                         size_t g, StageCounters& c) {
  size_t last = kNoPos;  // window of the previous node on this segment
  size_t p = s;
  while (p <= e) {
    const size_t wend = std::min(p + g - 1, e);
    size_t hit = kNoPos;
    for (size_t q = p; q <= wend; ++q) {
      if (uint32_t* count = nodes.find(scan.canon(q))) {
        ++*count;
        hit = q;
        break;
      }
    }
    if (hit != kNoPos) {
      ++c.round1_hits;
      last = hit;
      p = hit + 1;
    } else {
      const size_t ins = last == kNoPos ? p : last + g;
      if (ins > e) break;  // would land past the segment
      nodes.insert(scan.canon(ins), 1);
      ++c.round1_nodes_selected;
      last = ins;
      p = ins + 1;
    }
  }
}

template <typename SegmentFn>
void for_each_valid_run(const WindowScan& scan, SegmentFn&& fn) {
  const size_t n = scan.windows();
  size_t i = 0;
  while (i < n) {
    if (!scan.valid(i)) {
      ++i;
      continue;
    }
    size_t e = i;
    while (e + 1 < n && scan.valid(e + 1)) ++e;
    fn(i, e);
    i = e + 1;
  }
}

}  // namespace

KmerCountTable round1_select_nodes(ReadSource& reads, const GraphParams& params,
                                   StageCounters& counters) {
  params.validate();
  KmerCountTable nodes;
  WindowScan scan;
  std::string seq;
  const auto g = static_cast<size_t>(params.g);
  reads.reset();
  while (reads.next(seq)) {
    ++counters.reads;
    counters.bases += seq.size();
    if (seq.size() < static_cast<size_t>(params.k)) continue;
    scan.compute(seq, params.k);
    for_each_valid_run(scan, [&](size_t s, size_t e) {
      round1_scan_segment(nodes, scan, s, e, g, counters);
    });
  }
  return nodes;
}

uint64_t filter_low_coverage_nodes(KmerCountTable& nodes, uint32_t min_node_cov) {
  return nodes.filter(min_node_cov);
}

SparseGraph build_graph(const KmerCountTable& nodes, const GraphParams& params) {
  return SparseGraph::build(params, nodes.kmers());
}

// --- round 2 -------------------------------------------------------------

namespace {

struct Round2Shared {
  SparseGraph* graph;
  ReadSource* reads;
  std::mutex input_mu;
  std::mutex link_mu;
  std::mutex counter_mu;
  size_t g;
  int k;
};

void round2_worker(Round2Shared& sh, StageCounters& totals) {
  StageCounters local;
  WindowScan scan;
  std::vector<std::string> batch;
  SparseGraph& graph = *sh.graph;
  while (true) {
    batch.clear();
    {
      std::lock_guard<std::mutex> lock(sh.input_mu);
      std::string seq;
      while (batch.size() < 256 && sh.reads->next(seq)) batch.push_back(std::move(seq));
    }
    if (batch.empty()) break;
    for (const std::string& seq : batch) {
      if (seq.size() < static_cast<size_t>(sh.k)) continue;
      scan.compute(seq, sh.k);
      for_each_valid_run(scan, [&](size_t s, size_t e) {
        size_t last = kNoPos;
        bool last_flip = false;
        SparseGraph::NodeId last_id = SparseGraph::kNoNode;
        size_t p = s;
        while (p <= e) {
          const size_t wend = std::min(p + sh.g - 1, e);
          size_t hit = kNoPos;
          SparseGraph::NodeId id = SparseGraph::kNoNode;
          for (size_t q = p; q <= wend; ++q) {
            id = graph.find(scan.canon(q));
            if (id != SparseGraph::kNoNode) {
              hit = q;
              break;
            }
          }
          if (hit == kNoPos) {
            p = wend + 1;
            continue;
          }
          graph.bump_coverage_atomic(id);
          ++local.round2_hits;
          const bool flip = scan.flipped(hit);
          if (last != kNoPos) {
            const size_t gap = hit - last;
            if (gap <= sh.g) {
              const Side src_side = last_flip ? Side::Left : Side::Right;
              const Side dest_entry = flip ? Side::Right : Side::Left;
              std::lock_guard<std::mutex> lock(sh.link_mu);
              graph.add_link(last_id, src_side, id, dest_entry, static_cast<int>(gap));
              ++local.link_events;
            } else {
              ++local.chain_breaks;
            }
          }
          last = hit;
          last_flip = flip;
          last_id = id;
          p = hit + 1;
        }
      });
    }
  }
  std::lock_guard<std::mutex> lock(sh.counter_mu);
  totals.round2_hits += local.round2_hits;
  totals.link_events += local.link_events;
  totals.chain_breaks += local.chain_breaks;
}

}  // namespace

void round2_build_links(ReadSource& reads, SparseGraph& graph, StageCounters& counters,
                        int threads) {
  reads.reset();
  Round2Shared sh{&graph, &reads, {}, {}, {}, static_cast<size_t>(graph.params().g),
                  graph.params().k};
  if (threads <= 1) {
    round2_worker(sh, counters);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] { round2_worker(sh, counters); });
    for (auto& th : pool) th.join();
  }
  counters.links_built = graph.live_link_count();
}

// --- cleaning ------------------------------------------------------------

uint64_t remove_weak_links(SparseGraph& graph, uint32_t min_link_cov, uint32_t min_node_cov,
                           uint64_t* isolated_removed) {
  uint64_t removed = 0;
  if (min_link_cov > 1) {
    for (size_t i = 0; i < graph.capacity(); ++i) {
      const auto id = static_cast<SparseGraph::NodeId>(i);
      if (!graph.live(id)) continue;
      while (true) {
        const Link* weak = nullptr;
        for (const Link& l : graph.links(id)) {
          if (l.count < min_link_cov) {
            weak = &l;
            break;
          }
        }
        if (!weak) break;
        graph.remove_link_pair(id, *weak);
        ++removed;
      }
    }
  }
  uint64_t isolated = 0;
  for (size_t i = 0; i < graph.capacity(); ++i) {
    const auto id = static_cast<SparseGraph::NodeId>(i);
    if (!graph.live(id)) continue;
    if (graph.links(id).empty() && graph.coverage(id) < min_node_cov) {
      graph.delete_node(id);
      ++isolated;
    }
  }
  if (isolated_removed) *isolated_removed = isolated;
  return removed;
}

namespace {

struct BranchWalk {
  enum class End { Open, DeadEnd, Merged };
  End end = End::Open;
  Link head;
  std::vector<SparseGraph::NodeId> path;  // nodes after the branch point
  uint64_t total_count = 0;
  uint32_t total_len = 0;
  SparseGraph::NodeId merge_node = SparseGraph::kNoNode;
  size_t merge_pos = 0;        // own nodes before the merge node
  size_t sibling = SIZE_MAX;   // branch we merged into
  uint64_t sibling_count = 0;  // sibling's summed count at the merge node
};

struct SeenEntry {
  size_t branch;
  size_t pos;  // index in that branch's path
  uint64_t count_at;
};

// Removes the first `upto` nodes of a walk's path, or just the head link
// when the walk merged immediately.
void remove_branch_prefix(SparseGraph& graph, SparseGraph::NodeId from, const BranchWalk& w,
                          size_t upto) {
  if (upto == 0) {
    graph.remove_link_pair(from, w.head);
    return;
  }
  for (size_t i = 0; i < upto; ++i) graph.delete_node(w.path[i]);
}

// Resolves one branching side. Returns (tips removed, bubbles removed).
std::pair<uint64_t, uint64_t> resolve_branches(SparseGraph& graph, SparseGraph::NodeId node,
                                               Side side, uint32_t depth_limit) {
  std::vector<Link> heads;
  for (const Link& l : graph.links(node))
    if (l.side() == side) heads.push_back(l);
  // deterministic branch order regardless of link insertion order
  std::sort(heads.begin(), heads.end(), [&](const Link& a, const Link& b) {
    return graph.link_label(a) < graph.link_label(b);
  });

  std::unordered_map<SparseGraph::NodeId, SeenEntry> seen;
  std::vector<BranchWalk> walks(heads.size());
  for (size_t bi = 0; bi < heads.size(); ++bi) {
    BranchWalk& w = walks[bi];
    w.head = heads[bi];
    w.total_count = heads[bi].count;
    w.total_len = heads[bi].len;
    SparseGraph::NodeId cur = heads[bi].dest;
    Side entry = heads[bi].entry();
    if (cur == node) continue;  // immediate self loop: leave alone
    while (true) {
      auto it = seen.find(cur);
      if (it != seen.end()) {
        if (it->second.branch == bi) break;  // own loop: leave alone
        w.end = BranchWalk::End::Merged;
        w.sibling = it->second.branch;
        w.sibling_count = it->second.count_at;
        w.merge_node = cur;
        w.merge_pos = w.path.size();
        break;
      }
      w.path.push_back(cur);
      seen.emplace(cur, SeenEntry{bi, w.path.size() - 1, w.total_count});
      const Side out = opposite(entry);
      const Link* next = graph.sole_link(cur, out);
      if (!next) {
        if (graph.side_degree(cur, out) == 0) w.end = BranchWalk::End::DeadEnd;
        break;  // dead end or a further branching point
      }
      if (w.total_len + next->len > depth_limit) break;
      w.total_count += next->count;
      w.total_len += next->len;
      cur = next->dest;
      entry = next->entry();
      if (cur == node) break;  // looped back to the branch point
    }
  }

  // strongest branch: larger summed count, ties to the smaller head label
  size_t strongest = 0;
  for (size_t bi = 1; bi < walks.size(); ++bi) {
    if (walks[bi].total_count > walks[strongest].total_count) strongest = bi;
  }

  uint64_t tips = 0, bubbles = 0;
  std::vector<char> doomed(walks.size(), 0);
  std::vector<size_t> doom_upto(walks.size(), 0);
  for (size_t bi = 0; bi < walks.size(); ++bi) {
    BranchWalk& w = walks[bi];
    if (w.end == BranchWalk::End::Merged) {
      const size_t si = w.sibling;
      // the weaker path up to the merge node loses; on a tie the earlier
      // branch (lexically smaller head label) is kept
      const bool we_lose = w.total_count <= w.sibling_count;
      const size_t victim = we_lose ? bi : si;
      const size_t upto = we_lose ? w.merge_pos : seen.at(w.merge_node).pos;
      if (!doomed[victim]) {
        doomed[victim] = 1;
        doom_upto[victim] = upto;
        ++bubbles;
      }
    } else if (w.end == BranchWalk::End::DeadEnd) {
      if (bi != strongest && !doomed[bi]) {
        doomed[bi] = 1;
        doom_upto[bi] = w.path.size();
        ++tips;
      }
    }
  }

  for (size_t bi = 0; bi < walks.size(); ++bi) {
    if (doomed[bi]) remove_branch_prefix(graph, node, walks[bi], doom_upto[bi]);
  }
  return {tips, bubbles};
}

}  // namespace

std::pair<uint64_t, uint64_t> remove_tips_and_bubbles(SparseGraph& graph,
                                                      uint32_t tip_depth_bases) {
  uint64_t tips = 0, bubbles = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < graph.capacity(); ++i) {
      const auto id = static_cast<SparseGraph::NodeId>(i);
      if (!graph.live(id)) continue;
      for (Side side : {Side::Left, Side::Right}) {
        if (!graph.live(id)) break;
        if (graph.side_degree(id, side) < 2) continue;
        auto [t, b] = resolve_branches(graph, id, side, tip_depth_bases);
        tips += t;
        bubbles += b;
        if (t || b) changed = true;
      }
    }
  }
  return {tips, bubbles};
}

// --- traversal -----------------------------------------------------------

std::vector<Contig> extract_contigs(SparseGraph& graph, size_t min_contig_len,
                                    StageCounters* counters) {
  graph.clear_visited();
  std::vector<Contig> out;
  const int k = graph.params().k;

  // Walks one direction; returns true when the walk closed a cycle back at
  // the start node (the other direction would then retrace the same cycle).
  auto walk = [&](SparseGraph::NodeId start, Side dir, std::string& ext, uint64_t& cov_sum,
                  uint64_t& steps) {
    SparseGraph::NodeId cur = start;
    Side out_side = dir;
    while (true) {
      const Link* l = graph.sole_link(cur, out_side);
      if (!l) return false;
      if (graph.side_degree(l->dest, l->entry()) != 1) return false;
      const bool arrival_flipped = l->entry() == Side::Right;
      if (graph.visited(l->dest, arrival_flipped)) return l->dest == start;
      graph.set_visited(l->dest, arrival_flipped);
      ext += graph.link_label(*l);
      cov_sum += graph.coverage(l->dest);
      ++steps;
      out_side = opposite(l->entry());
      cur = l->dest;
    }
  };

  for (SparseGraph::NodeId seed : graph.live_nodes_by_kmer()) {
    if (graph.visited_any(seed)) continue;
    graph.set_visited(seed, false);
    graph.set_visited(seed, true);
    uint64_t cov_sum = graph.coverage(seed);
    uint64_t steps = 1;
    std::string right, left;
    const bool cycle = walk(seed, Side::Right, right, cov_sum, steps);
    if (!cycle) walk(seed, Side::Left, left, cov_sum, steps);
    std::string seq = revcomp_str(left) + decode_kmer(graph.node_kmer(seed), k) + right;
    std::string rc = revcomp_str(seq);
    if (rc < seq) seq = std::move(rc);
    if (seq.size() < min_contig_len) {
      if (counters) ++counters->contigs_dropped_short;
      continue;
    }
    out.push_back({std::move(seq), static_cast<double>(cov_sum) / static_cast<double>(steps)});
  }
  if (counters) counters->contigs = out.size();
  return out;
}

// --- whole pipeline ------------------------------------------------------

AssembleResult assemble(ReadSource& reads, const GraphParams& params,
                        const AssembleOptions& options) {
  params.validate();
  AssembleResult result;
  StageCounters& c = result.counters;
  auto log = [&](const std::string& line) {
    if (options.log) *options.log << line << '\n';
  };

  KmerCountTable candidates = round1_select_nodes(reads, params, c);
  c.graph_peak_bits = std::max(c.graph_peak_bits, candidates.measured_bits());
  log("stage=round1 reads=" + std::to_string(c.reads) + " bases=" + std::to_string(c.bases) +
      " nodes_selected=" + std::to_string(c.round1_nodes_selected) +
      " hits=" + std::to_string(c.round1_hits) +
      " table_bits=" + std::to_string(candidates.measured_bits()));

  c.nodes_filtered = filter_low_coverage_nodes(candidates, params.min_node_cov);
  log("stage=filter min_node_cov=" + std::to_string(params.min_node_cov) +
      " nodes_removed=" + std::to_string(c.nodes_filtered) +
      " nodes_kept=" + std::to_string(candidates.size()));

  SparseGraph graph = build_graph(candidates, params);
  candidates = KmerCountTable();  // release the round-1 table

  round2_build_links(reads, graph, c, options.threads);
  c.graph_peak_bits = std::max(c.graph_peak_bits, graph.measured_bits());
  log("stage=round2 hits=" + std::to_string(c.round2_hits) +
      " link_events=" + std::to_string(c.link_events) +
      " links=" + std::to_string(c.links_built) +
      " chain_breaks=" + std::to_string(c.chain_breaks) +
      " graph_bits=" + std::to_string(graph.measured_bits()));

  c.weak_links_removed =
      remove_weak_links(graph, params.min_link_cov, params.min_node_cov,
                        &c.isolated_nodes_removed);
  log("stage=weak_links min_link_cov=" + std::to_string(params.min_link_cov) +
      " links_removed=" + std::to_string(c.weak_links_removed) +
      " isolated_nodes_removed=" + std::to_string(c.isolated_nodes_removed));

  auto [tips, bubbles] = remove_tips_and_bubbles(graph, params.effective_tip_depth());
  c.tips_removed = tips;
  c.bubbles_removed = bubbles;
  log("stage=tips_bubbles tip_depth=" + std::to_string(params.effective_tip_depth()) +
      " tips_removed=" + std::to_string(tips) +
      " bubbles_removed=" + std::to_string(bubbles));

  result.contigs = extract_contigs(graph, options.min_contig_len, &c);
  c.final_nodes = graph.node_count();
  c.final_links = graph.live_link_count();
  c.graph_final_bits = graph.measured_bits();
  c.graph_peak_bits = std::max(c.graph_peak_bits, c.graph_final_bits);
  log("stage=contigs emitted=" + std::to_string(c.contigs) +
      " dropped_short=" + std::to_string(c.contigs_dropped_short) +
      " final_nodes=" + std::to_string(c.final_nodes) +
      " final_links=" + std::to_string(c.final_links) +
      " graph_bits=" + std::to_string(c.graph_final_bits) +
      " peak_bits=" + std::to_string(c.graph_peak_bits));

  if (options.keep_graph) *options.keep_graph = std::move(graph);
  return result;
}

}  // namespace skga
