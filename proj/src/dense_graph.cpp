#include "skga/dense_graph.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

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

}  // namespace

DenseGraph::DenseGraph(int k) : k_(k) {
  if (k < 3 || k > kMaxK || (k & 1) == 0)
    throw std::invalid_argument("k must be odd and at most 31");
  cap_ = 1u << 16;
  keys_.assign(cap_, kEmptyKey);
  edges_.assign(cap_, 0);
  cov_.assign(cap_, 0);
}

size_t DenseGraph::slot_of(uint64_t key) const { return hash64(key) & (cap_ - 1); }

void DenseGraph::rehash(size_t new_cap) {
  if (new_cap > UINT32_MAX) throw std::length_error("dense graph node id space exhausted");
  std::vector<uint64_t> old_keys = std::move(keys_);
  std::vector<uint8_t> old_edges = std::move(edges_);
  std::vector<uint32_t> old_cov = std::move(cov_);
  const size_t old_cap = cap_;
  cap_ = new_cap;
  keys_.assign(cap_, kEmptyKey);
  edges_.assign(cap_, 0);
  cov_.assign(cap_, 0);
  for (size_t i = 0; i < old_cap; ++i) {
    if (old_keys[i] == kEmptyKey) continue;
    size_t j = slot_of(old_keys[i]);
    while (keys_[j] != kEmptyKey) j = (j + 1) & (cap_ - 1);
    keys_[j] = old_keys[i];
    edges_[j] = old_edges[i];
    cov_[j] = old_cov[i];
  }
}

DenseGraph::NodeId DenseGraph::get_or_insert(uint64_t canon_bits) {
  if ((node_count_ + 1) * 5 > cap_ * 4) rehash(cap_ * 2);
  size_t i = slot_of(canon_bits);
  while (true) {
    if (keys_[i] == kEmptyKey) {
      keys_[i] = canon_bits;
      ++node_count_;
      return static_cast<NodeId>(i);
    }
    if (keys_[i] == canon_bits) return static_cast<NodeId>(i);
    i = (i + 1) & (cap_ - 1);
  }
}

DenseGraph::NodeId DenseGraph::find(uint64_t canon_bits) const {
  size_t i = slot_of(canon_bits);
  while (true) {
    if (keys_[i] == kEmptyKey) return kNoNode;
    if (keys_[i] == canon_bits) return static_cast<NodeId>(i);
    i = (i + 1) & (cap_ - 1);
  }
}

void DenseGraph::add_read(std::string_view read) {
  const int k = k_;
  if (static_cast<int>(read.size()) < k) return;
  scan_.compute(read, k);
  NodeId prev = kNoNode;
  bool prev_flip = false;
  for (size_t i = 0; i < scan_.windows(); ++i) {
    if (!scan_.valid(i)) {
      prev = kNoNode;
      continue;
    }
    const NodeId id = get_or_insert(scan_.canon(i));
    const bool flip = scan_.flipped(i);
    ++cov_[id];
    if (prev != kNoNode) {
      // adjacency between windows i-1 and i
      const uint8_t b = base_code(read[i - 1 + k]);  // base entering window i
      const uint8_t a = base_code(read[i - 1]);      // base leaving window i-1
      edges_[prev] |= static_cast<uint8_t>(1u << (prev_flip ? 4 + b : b));
      edges_[id] |= static_cast<uint8_t>(1u << (flip ? complement_code(a) : 4 + complement_code(a)));
    }
    prev = id;
    prev_flip = flip;
  }
}

uint64_t DenseGraph::measured_bits() const {
  return (keys_.capacity() * sizeof(uint64_t) + edges_.capacity() * sizeof(uint8_t)) * 8;
}

int DenseGraph::side_edge_count(NodeId id, bool right, uint8_t* base) const {
  const uint8_t bits = right ? (edges_[id] & 0x0f) : (edges_[id] >> 4);
  const int n = __builtin_popcount(bits);
  if (n == 1 && base) *base = static_cast<uint8_t>(__builtin_ctz(bits));
  return n;
}

std::vector<Contig> DenseGraph::extract_unitigs(size_t min_len) {
  visited_.assign(cap_, 0);
  std::vector<NodeId> seeds;
  seeds.reserve(node_count_);
  for (size_t i = 0; i < cap_; ++i)
    if (keys_[i] != kEmptyKey) seeds.push_back(static_cast<NodeId>(i));
  std::sort(seeds.begin(), seeds.end(),
            [&](NodeId a, NodeId b) { return keys_[a] < keys_[b]; });

  const uint64_t mask = kmer_mask(k_);
  std::vector<Contig> out;
  // Walks one direction from a window, appending travel-frame bases;
  // returns true when it closed a cycle back at the seed.
  auto walk = [&](uint64_t window, NodeId seed, std::string& ext, uint64_t& cov_sum,
                  uint64_t& steps) {
    while (true) {
      const NodeId cur = find(canonicalize(window, k_).bits);
      const bool flip = window != keys_[cur];
      uint8_t b = 0;
      if (side_edge_count(cur, !flip, &b) != 1) return false;
      const uint64_t next_window = ((window << 2) | b) & mask;
      const CanonicalKmer c = canonicalize(next_window, k_);
      const NodeId next = find(c.bits);
      assert(next != kNoNode);
      // the side of next facing us must be unambiguous too
      if (side_edge_count(next, c.flipped, nullptr) != 1) return false;
      const uint8_t vbit = c.flipped ? 2 : 1;
      if (visited_[next] & vbit) return next == seed;
      visited_[next] |= vbit;
      ext += kBaseChar[b];
      cov_sum += cov_[next];
      ++steps;
      window = next_window;
    }
  };

  for (NodeId seed : seeds) {
    if (visited_[seed]) continue;
    visited_[seed] = 3;
    uint64_t cov_sum = cov_[seed];
    uint64_t steps = 1;
    std::string right, left;
    const bool cycle = walk(keys_[seed], seed, right, cov_sum, steps);
    if (!cycle) walk(revcomp_bits(keys_[seed], k_), seed, left, cov_sum, steps);
    std::string seq = revcomp_str(left) + decode_kmer(keys_[seed], k_) + right;
    std::string rc = revcomp_str(seq);
    if (rc < seq) seq = std::move(rc);
    if (seq.size() >= min_len)
      out.push_back({std::move(seq), static_cast<double>(cov_sum) / static_cast<double>(steps)});
  }
  return out;
}

void DenseGraph::dump(std::ostream& out) const {
  std::vector<NodeId> ids;
  for (size_t i = 0; i < cap_; ++i)
    if (keys_[i] != kEmptyKey) ids.push_back(static_cast<NodeId>(i));
  std::sort(ids.begin(), ids.end(), [&](NodeId a, NodeId b) { return keys_[a] < keys_[b]; });
  for (NodeId id : ids) {
    out << decode_kmer(keys_[id], k_) << ' ' << cov_[id];
    for (int side = 0; side < 2; ++side) {
      for (uint8_t b = 0; b < 4; ++b) {
        if (edges_[id] & (1u << (side == 0 ? 4 + b : b))) {
          out << ' ' << (side == 0 ? 'L' : 'R') << ',' << kBaseChar[b] << ",1";
        }
      }
    }
    out << '\n';
  }
}

DenseGraph build_dense(ReadSource& reads, int k) {
  DenseGraph graph(k);
  reads.reset();
  std::string seq;
  while (reads.next(seq)) graph.add_read(seq);
  return graph;
}

}  // namespace skga
