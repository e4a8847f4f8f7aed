#include "skga/sparse_graph.hpp"

#include <algorithm>
#include <atomic>
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

// The CLI restricts k to the documented [15,31]; the library additionally
// accepts small odd k so toy-scale graphs stay constructible in tests.
void GraphParams::validate() const {
  if (k < 3 || k > kMaxK || (k & 1) == 0)
    throw std::invalid_argument("k must be odd and at most " + std::to_string(kMaxK) +
                                ", got " + std::to_string(k));
  if (g < 1 || g > k)
    throw std::invalid_argument("g must be in [1,k], got " + std::to_string(g));
}

size_t SparseGraph::slot_of(uint64_t key) const {
  return static_cast<size_t>((static_cast<__uint128_t>(hash64(key)) * cap_) >> 64);
}

void SparseGraph::allocate(size_t cap) {
  cap_ = cap;
  keys_.assign(cap, kEmptyKey);
  cov_.assign(cap, 0);
  meta_.assign(cap, 0);
  inl_.assign(cap, std::array<Link, 2>{});
  filled_ = 0;
}

SparseGraph SparseGraph::build(const GraphParams& params, const std::vector<uint64_t>& kmers) {
  SparseGraph graph(params);
  graph.allocate(std::max<size_t>(16, kmers.size() + kmers.size() / 4 + 8));
  for (uint64_t km : kmers) {
    auto [id, inserted] = graph.get_or_insert_node(km);
    (void)id;
    (void)inserted;
    assert(inserted);
  }
  return graph;
}

std::pair<SparseGraph::NodeId, bool> SparseGraph::get_or_insert_node(uint64_t canon_bits) {
  assert(canon_bits != kEmptyKey);
  if (cap_ == 0) allocate(16);
  if ((filled_ + 1) * 5 > cap_ * 4) rehash(cap_ * 2);
  size_t i = slot_of(canon_bits);
  while (true) {
    if (keys_[i] == kEmptyKey) {
      if (filled_ >= UINT32_MAX - 1) throw std::length_error("node id space exhausted");
      keys_[i] = canon_bits;
      cov_[i] = 0;
      meta_[i] = 0;
      ++filled_;
      ++node_count_;
      return {static_cast<NodeId>(i), true};
    }
    if (keys_[i] == canon_bits) {
      const auto id = static_cast<NodeId>(i);
      if (meta_[i] & kDeleted) {  // revive
        meta_[i] = 0;
        cov_[i] = 0;
        ++node_count_;
        return {id, true};
      }
      return {id, false};
    }
    if (++i == cap_) i = 0;
  }
}

SparseGraph::NodeId SparseGraph::find(uint64_t canon_bits) const {
  if (cap_ == 0) return kNoNode;
  size_t i = slot_of(canon_bits);
  while (true) {
    if (keys_[i] == kEmptyKey) return kNoNode;
    if (keys_[i] == canon_bits) return static_cast<NodeId>(i);
    if (++i == cap_) i = 0;
  }
}

void SparseGraph::rehash(size_t new_cap) {
  if (new_cap > UINT32_MAX) throw std::length_error("node id space exhausted");
  std::vector<uint64_t> old_keys = std::move(keys_);
  std::vector<uint32_t> old_cov = std::move(cov_);
  std::vector<uint8_t> old_meta = std::move(meta_);
  std::vector<std::array<Link, 2>> old_inl = std::move(inl_);
  const size_t old_cap = cap_;
  allocate(new_cap);

  std::vector<NodeId> remap(old_cap, kNoNode);
  for (size_t i = 0; i < old_cap; ++i) {
    if (old_keys[i] == kEmptyKey) continue;
    size_t j = slot_of(old_keys[i]);
    while (keys_[j] != kEmptyKey) {
      if (++j == new_cap) j = 0;
    }
    keys_[j] = old_keys[i];
    cov_[j] = old_cov[i];
    meta_[j] = old_meta[i];
    inl_[j] = old_inl[i];
    remap[i] = static_cast<NodeId>(j);
    ++filled_;
  }
  // rewrite link destinations; overflow arena indices are untouched
  for (size_t j = 0; j < new_cap; ++j) {
    if (keys_[j] == kEmptyKey || (meta_[j] & kOverflow)) continue;
    for (uint8_t n = 0; n < inline_count(static_cast<NodeId>(j)); ++n)
      inl_[j][n].dest = remap[inl_[j][n].dest];
  }
  for (auto& list : overflow_) {
    for (Link& l : list) l.dest = remap[l.dest];
  }
}

void SparseGraph::bump_coverage_atomic(NodeId id) {
  std::atomic_ref<uint32_t>(cov_[id]).fetch_add(1, std::memory_order_relaxed);
}

std::span<const Link> SparseGraph::links(NodeId id) const {
  if (meta_[id] & kOverflow) {
    const auto& v = overflow_[inl_[id][0].dest];
    return {v.data(), v.size()};
  }
  return {inl_[id].data(), inline_count(id)};
}

std::span<Link> SparseGraph::mutable_links(NodeId id) {
  if (meta_[id] & kOverflow) {
    auto& v = overflow_[inl_[id][0].dest];
    return {v.data(), v.size()};
  }
  return {inl_[id].data(), inline_count(id)};
}

size_t SparseGraph::side_degree(NodeId id, Side s) const {
  size_t n = 0;
  for (const Link& l : links(id))
    if (l.side() == s) ++n;
  return n;
}

const Link* SparseGraph::sole_link(NodeId id, Side s) const {
  const Link* hit = nullptr;
  for (const Link& l : links(id)) {
    if (l.side() != s) continue;
    if (hit) return nullptr;
    hit = &l;
  }
  return hit;
}

void SparseGraph::push_link(NodeId id, const Link& l) {
  ++live_links_;
  if (meta_[id] & kOverflow) {
    overflow_[inl_[id][0].dest].push_back(l);
    return;
  }
  const uint8_t n = inline_count(id);
  if (n < 2) {
    inl_[id][n] = l;
    set_inline_count(id, n + 1);
    return;
  }
  // spill: move both inline links plus the new one into the arena
  std::vector<Link> list;
  list.reserve(4);
  list.push_back(inl_[id][0]);
  list.push_back(inl_[id][1]);
  list.push_back(l);
  const auto arena_idx = static_cast<uint32_t>(overflow_.size());
  overflow_.push_back(std::move(list));
  inl_[id][0].dest = arena_idx;
  set_inline_count(id, 0);
  meta_[id] |= kOverflow;
}

void SparseGraph::erase_link(NodeId id, size_t pos) {
  --live_links_;
  if (meta_[id] & kOverflow) {
    auto& v = overflow_[inl_[id][0].dest];
    v.erase(v.begin() + static_cast<ptrdiff_t>(pos));
    return;
  }
  const uint8_t n = inline_count(id);
  assert(pos < n);
  if (pos == 0 && n == 2) inl_[id][0] = inl_[id][1];
  set_inline_count(id, n - 1);
}

Link* SparseGraph::find_link(NodeId id, Side side, NodeId dest, Side entry, int len) {
  for (Link& l : mutable_links(id)) {
    if (l.side() == side && l.dest == dest && l.entry() == entry &&
        l.len == static_cast<uint8_t>(len))
      return &l;
  }
  return nullptr;
}

uint32_t SparseGraph::bump_pair(NodeId src, Side src_side, NodeId dest, Side dest_entry,
                                int len) {
  const bool self_mirror = (dest == src && dest_entry == src_side);
  uint32_t count;
  if (Link* l = find_link(src, src_side, dest, dest_entry, len)) {
    if (l->count < UINT16_MAX) ++l->count;
    count = l->count;
  } else {
    push_link(src, Link{dest, 1, static_cast<uint8_t>(len),
                        Link::pack_meta(src_side, dest_entry)});
    count = 1;
  }
  if (!self_mirror) {
    if (Link* m = find_link(dest, dest_entry, src, src_side, len)) {
      if (m->count < UINT16_MAX) ++m->count;
    } else {
      push_link(dest, Link{src, 1, static_cast<uint8_t>(len),
                           Link::pack_meta(dest_entry, src_side)});
    }
  }
  return count;
}

uint32_t SparseGraph::add_link(NodeId src, Side src_side, NodeId dest, Side dest_entry,
                               int len) {
  assert(len >= 1 && len <= params_.g);
  return bump_pair(src, src_side, dest, dest_entry, len);
}

uint32_t SparseGraph::add_or_bump_link(NodeId src, Side src_side, uint64_t label_bits,
                                       int len, NodeId dest, Side dest_entry) {
  if (len < 1 || len > params_.g)
    throw std::invalid_argument("link label length " + std::to_string(len) +
                                " outside [1,g], g=" + std::to_string(params_.g));
  if (!live(src) || !live(dest)) throw std::invalid_argument("link endpoints must be live");
  const int k = params_.k;
  const uint64_t o = src_side == Side::Right ? keys_[src] : revcomp_bits(keys_[src], k);
  const uint64_t window = ((o << (2 * len)) | label_bits) & kmer_mask(k);
  const CanonicalKmer c = canonicalize(window, k);
  const Side implied_entry = c.flipped ? Side::Right : Side::Left;
  if (c.bits != keys_[dest] || implied_entry != dest_entry)
    throw std::invalid_argument("label does not lead from src to dest");
  return bump_pair(src, src_side, dest, dest_entry, len);
}

uint64_t SparseGraph::link_label_bits(const Link& l) const {
  const uint64_t w = l.entry() == Side::Left ? keys_[l.dest]
                                             : revcomp_bits(keys_[l.dest], params_.k);
  return w & kmer_mask(l.len);
}

std::string SparseGraph::link_label(const Link& l) const {
  return decode_bases(link_label_bits(l), l.len);
}

uint64_t SparseGraph::follow_window(NodeId src, const Link& l) const {
  const int k = params_.k;
  const uint64_t o = l.side() == Side::Right ? keys_[src] : revcomp_bits(keys_[src], k);
  return ((o << (2 * l.len)) | link_label_bits(l)) & kmer_mask(k);
}

void SparseGraph::remove_half(NodeId owner, Side side, NodeId dest, Side entry, int len) {
  auto list = mutable_links(owner);
  for (size_t i = 0; i < list.size(); ++i) {
    const Link& l = list[i];
    if (l.side() == side && l.dest == dest && l.entry() == entry &&
        l.len == static_cast<uint8_t>(len)) {
      erase_link(owner, i);
      return;
    }
  }
  assert(false && "mirror link not found");
}

void SparseGraph::remove_link_pair(NodeId src, const Link& l) {
  remove_half(src, l.side(), l.dest, l.entry(), l.len);
  if (!(l.dest == src && l.entry() == l.side()))
    remove_half(l.dest, l.entry(), src, l.side(), l.len);
}

void SparseGraph::delete_node(NodeId id) {
  if (!live(id)) return;
  // detach mirrors held by neighbors; self links vanish with our own list
  std::vector<Link> mine(links(id).begin(), links(id).end());
  for (const Link& l : mine) {
    if (l.dest != id) remove_half(l.dest, l.entry(), id, l.side(), l.len);
  }
  live_links_ -= mine.size();
  if (meta_[id] & kOverflow) {
    auto& v = overflow_[inl_[id][0].dest];
    v.clear();
    v.shrink_to_fit();
    meta_[id] &= static_cast<uint8_t>(~kOverflow);
  }
  set_inline_count(id, 0);
  meta_[id] |= kDeleted;
  --node_count_;
}

void SparseGraph::clear_visited() {
  for (auto& m : meta_) m &= static_cast<uint8_t>(~(kVisitedFwd | kVisitedRc));
}

uint64_t SparseGraph::measured_bits() const {
  uint64_t bytes = keys_.capacity() * sizeof(uint64_t) + cov_.capacity() * sizeof(uint32_t) +
                   meta_.capacity() * sizeof(uint8_t) + inl_.capacity() * sizeof(inl_[0]);
  bytes += overflow_.capacity() * sizeof(std::vector<Link>);
  for (const auto& v : overflow_) bytes += v.capacity() * sizeof(Link);
  return bytes * 8;
}

std::vector<SparseGraph::NodeId> SparseGraph::live_nodes_by_kmer() const {
  std::vector<NodeId> ids;
  ids.reserve(node_count_);
  for (size_t i = 0; i < cap_; ++i) {
    if (keys_[i] != kEmptyKey && !(meta_[i] & kDeleted)) ids.push_back(static_cast<NodeId>(i));
  }
  std::sort(ids.begin(), ids.end(),
            [&](NodeId a, NodeId b) { return keys_[a] < keys_[b]; });
  return ids;
}

void SparseGraph::dump(std::ostream& out) const {
  for (NodeId id : live_nodes_by_kmer()) {
    out << decode_kmer(keys_[id], params_.k) << ' ' << cov_[id];
    std::vector<std::pair<std::string, uint32_t>> entries;
    for (const Link& l : links(id)) {
      std::string key;
      key += side_char(l.side());
      key += ',';
      key += link_label(l);
      entries.emplace_back(std::move(key), l.count);
    }
    std::sort(entries.begin(), entries.end());
    for (const auto& [key, count] : entries) out << ' ' << key << ',' << count;
    out << '\n';
  }
}

std::vector<std::string> SparseGraph::validate_structure() const {
  std::vector<std::string> bad;
  auto complain = [&](NodeId id, const std::string& what) {
    if (bad.size() < 64)
      bad.push_back("node " + decode_kmer(keys_[id], params_.k) + ": " + what);
  };
  for (size_t i = 0; i < cap_; ++i) {
    if (keys_[i] == kEmptyKey) continue;
    const auto id = static_cast<NodeId>(i);
    if (meta_[i] & kDeleted) {
      if (!links(id).empty()) complain(id, "deleted node owns links");
      continue;
    }
    const auto list = links(id);
    for (size_t a = 0; a < list.size(); ++a) {
      const Link& l = list[a];
      if (l.len < 1 || l.len > params_.g) complain(id, "label length out of range");
      if (l.count < 1) complain(id, "live link with zero count");
      if (l.dest >= cap_ || keys_[l.dest] == kEmptyKey || (meta_[l.dest] & kDeleted)) {
        complain(id, "link to dead node");
        continue;
      }
      // label/destination consistency
      const uint64_t w = follow_window(id, l);
      const CanonicalKmer c = canonicalize(w, params_.k);
      const Side implied = c.flipped ? Side::Right : Side::Left;
      if (c.bits != keys_[l.dest] || implied != l.entry())
        complain(id, "label does not reach its destination");
      // no duplicate labels per side
      for (size_t b = a + 1; b < list.size(); ++b) {
        const Link& o = list[b];
        if (o.side() == l.side() && o.dest == l.dest && o.entry() == l.entry() &&
            o.len == l.len)
          complain(id, "duplicate label on one side");
      }
      // mirror half, with an equal count
      const bool self_mirror = (l.dest == id && l.entry() == l.side());
      if (!self_mirror) {
        size_t found = 0;
        uint32_t mirror_count = 0;
        for (const Link& m : links(l.dest)) {
          if (m.side() == l.entry() && m.dest == id && m.entry() == l.side() &&
              m.len == l.len) {
            ++found;
            mirror_count = m.count;
          }
        }
        if (found != 1)
          complain(id, "mirror link missing or duplicated");
        else if (mirror_count != l.count)
          complain(id, "mirror count mismatch");
      }
    }
  }
  return bad;
}

uint64_t estimate_dense_bits(uint64_t n_kmers, int k) {
  return n_kmers * (2 * static_cast<uint64_t>(k) + 8);
}

uint64_t estimate_sparse_bits(uint64_t n_kmers, int k, int g, int ptr_bits) {
  const uint64_t stored = (n_kmers + g - 1) / g;
  return stored * (2 * static_cast<uint64_t>(k) + 4 * static_cast<uint64_t>(g) +
                   static_cast<uint64_t>(ptr_bits));
}

}  // namespace skga
