#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "skga/kmer.hpp"

namespace skga {

enum class Side : uint8_t { Left = 0, Right = 1 };

inline Side opposite(Side s) { return s == Side::Left ? Side::Right : Side::Left; }
inline char side_char(Side s) { return s == Side::Left ? 'L' : 'R'; }

struct GraphParams {
  int k = 31;
  int g = 25;
  uint32_t min_node_cov = 2;
  uint32_t min_link_cov = 2;
  uint32_t tip_depth_limit = 0;  // bases; 0 selects the default 2*(k+g)

  uint32_t effective_tip_depth() const {
    return tip_depth_limit ? tip_depth_limit : 2u * static_cast<uint32_t>(k + g);
  }
  void validate() const;  // throws std::invalid_argument
};

// One direction of an edge. The neighboring bases of the label are not
// stored: with the destination id, its entry side and the length, the label
// is exactly the last len bases of the destination window and is
// rematerialized on demand. count saturates at 65535.
struct Link {
  uint32_t dest = 0;
  uint16_t count = 0;
  uint8_t len = 0;  // 1..g bases
  uint8_t meta = 0; // bit0: source side, bit1: entry side at dest

  Side side() const { return static_cast<Side>(meta & 1u); }
  Side entry() const { return static_cast<Side>((meta >> 1) & 1u); }
  static uint8_t pack_meta(Side side, Side entry) {
    return static_cast<uint8_t>(static_cast<uint8_t>(side) |
                                (static_cast<uint8_t>(entry) << 1));
  }
};

// Associative store of sparse k-mer nodes. Node ids are slots of an open
// addressing table (key = canonical k-mer), so a lookup and an id-to-k-mer
// access are both O(1); ids are stable until a rehash. Interior nodes keep
// their two links inline; branching nodes spill into a shared arena.
class SparseGraph {
 public:
  using NodeId = uint32_t;
  static constexpr NodeId kNoNode = UINT32_MAX;
  static constexpr uint64_t kEmptyKey = ~uint64_t{0};

  SparseGraph() = default;
  explicit SparseGraph(const GraphParams& params) : params_(params) { params_.validate(); }

  // Exact-size construction for a known node set (coverages start at 0).
  static SparseGraph build(const GraphParams& params, const std::vector<uint64_t>& canon_kmers);

  const GraphParams& params() const { return params_; }

  // Idempotent: a second call with the same k-mer returns the same id with
  // inserted == false. May rehash (invalidating previously returned ids)
  // when the table grows; throws std::length_error at the id-space limit.
  std::pair<NodeId, bool> get_or_insert_node(uint64_t canon_bits);
  std::pair<NodeId, bool> get_or_insert_node(const CanonicalKmer& c) {
    return get_or_insert_node(c.bits);
  }

  NodeId find(uint64_t canon_bits) const;

  bool live(NodeId id) const { return keys_[id] != kEmptyKey && !(meta_[id] & kDeleted); }
  uint64_t node_kmer(NodeId id) const { return keys_[id]; }
  uint32_t coverage(NodeId id) const { return cov_[id]; }
  void bump_coverage(NodeId id, uint32_t n = 1) { cov_[id] += n; }
  void bump_coverage_atomic(NodeId id);
  void set_coverage(NodeId id, uint32_t v) { cov_[id] = v; }

  // Adds or bumps the link and its mirror half on dest; label must be
  // consistent with dest (checked). Returns the updated count.
  uint32_t add_or_bump_link(NodeId src, Side src_side, uint64_t label_bits, int len,
                            NodeId dest, Side dest_entry);
  // Same, label implied by (dest, dest_entry, len). Used by the build pass.
  uint32_t add_link(NodeId src, Side src_side, NodeId dest, Side dest_entry, int len);

  std::span<const Link> links(NodeId id) const;
  size_t side_degree(NodeId id, Side s) const;
  // The only live link on a side; null if the degree is not exactly 1.
  const Link* sole_link(NodeId id, Side s) const;

  uint64_t link_label_bits(const Link& l) const;
  std::string link_label(const Link& l) const;

  // The window read when traversing l away from src, i.e. the observed
  // orientation of the destination k-mer.
  uint64_t follow_window(NodeId src, const Link& l) const;

  void remove_link_pair(NodeId src, const Link& l);
  void delete_node(NodeId id);

  // visited flags, one per traversal orientation
  bool visited(NodeId id, bool flipped) const {
    return meta_[id] & (flipped ? kVisitedRc : kVisitedFwd);
  }
  void set_visited(NodeId id, bool flipped) {
    meta_[id] |= (flipped ? kVisitedRc : kVisitedFwd);
  }
  bool visited_any(NodeId id) const { return meta_[id] & (kVisitedFwd | kVisitedRc); }
  void clear_visited();

  uint64_t node_count() const { return node_count_; }
  uint64_t live_link_count() const { return live_links_; }
  size_t capacity() const { return cap_; }
  // Bit cost of the store as laid out in memory (table, node records,
  // overflow arena), counting allocated capacity.
  uint64_t measured_bits() const;

  // One line per live node, ascending k-mer order:
  //   <kmer> <coverage> <side,label,count>...
  void dump(std::ostream& out) const;

  // Full structural scan; returns human-readable violations (empty = ok):
  // label/destination consistency, mirror symmetry, duplicate labels,
  // deleted nodes owning or receiving links.
  std::vector<std::string> validate_structure() const;

  std::vector<NodeId> live_nodes_by_kmer() const;

 private:
  static constexpr uint8_t kDeleted = 1u << 0;
  static constexpr uint8_t kVisitedFwd = 1u << 1;
  static constexpr uint8_t kVisitedRc = 1u << 2;
  static constexpr uint8_t kOverflow = 1u << 3;
  // bits 4-5: inline link count

  uint8_t inline_count(NodeId id) const { return (meta_[id] >> 4) & 3u; }
  void set_inline_count(NodeId id, uint8_t n) {
    meta_[id] = static_cast<uint8_t>((meta_[id] & ~(3u << 4)) | (n << 4));
  }
  std::span<Link> mutable_links(NodeId id);
  void push_link(NodeId id, const Link& l);
  void erase_link(NodeId id, size_t pos);
  Link* find_link(NodeId id, Side side, NodeId dest, Side entry, int len);
  uint32_t bump_pair(NodeId src, Side src_side, NodeId dest, Side dest_entry, int len);
  void remove_half(NodeId owner, Side side, NodeId dest, Side entry, int len);

  size_t slot_of(uint64_t key) const;
  void rehash(size_t new_cap);
  void allocate(size_t cap);

  GraphParams params_;
  size_t cap_ = 0;
  size_t filled_ = 0;  // occupied slots including deleted nodes
  uint64_t node_count_ = 0;
  uint64_t live_links_ = 0;
  std::vector<uint64_t> keys_;
  std::vector<uint32_t> cov_;
  std::vector<uint8_t> meta_;
  std::vector<std::array<Link, 2>> inl_;
  std::vector<std::vector<Link>> overflow_;
};

// Memory cost of a dense de Bruijn graph over N distinct k-mers: 2k bits of
// k-mer plus 4 edge-presence bits per side.
uint64_t estimate_dense_bits(uint64_t n_kmers, int k);

// Memory cost of the sparse k-mer graph: one stored node per g k-mers, each
// carrying 2k bits of k-mer, up to g neighbor bases per side (4g bits) and
// ptr_bits of link-structure overhead.
uint64_t estimate_sparse_bits(uint64_t n_kmers, int k, int g, int ptr_bits);

}  // namespace skga
