#include "skga/stats.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "skga/kmer.hpp"

namespace skga {

uint64_t n50(std::vector<uint64_t> lengths) {
  if (lengths.empty()) return 0;
  std::sort(lengths.begin(), lengths.end(), std::greater<>());
  uint64_t total = 0;
  for (uint64_t v : lengths) total += v;
  uint64_t cum = 0;
  for (uint64_t v : lengths) {
    cum += v;
    if (2 * cum >= total) return v;
  }
  return lengths.back();
}

SizeStats size_stats(std::span<const Contig> contigs) {
  SizeStats s;
  std::vector<uint64_t> big;
  for (const Contig& c : contigs) {
    const uint64_t len = c.seq.size();
    s.longest = std::max(s.longest, len);
    if (len > 100) {
      ++s.n_gt_100;
      s.sum_gt_100 += len;
      big.push_back(len);
    }
    if (len > 10000) {
      ++s.n_gt_10k;
      s.sum_gt_10k += len;
    }
  }
  if (s.n_gt_100)
    s.mean_size = static_cast<double>(s.sum_gt_100) / static_cast<double>(s.n_gt_100);
  s.n50_bp = n50(std::move(big));
  return s;
}

namespace {

inline uint64_t hash64(uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

// Open-addressing index of reference k-mers that occur exactly once.
// Value packs record id (16 bits), position (40), flip (1), dup (1).
class UniqueKmerIndex {
 public:
  UniqueKmerIndex(std::span<const FastaRecord> reference, int k) {
    uint64_t total_windows = 0;
    for (const auto& rec : reference)
      if (rec.seq.size() >= static_cast<size_t>(k))
        total_windows += rec.seq.size() - k + 1;
    size_t cap = 1;
    while (cap * 4 < total_windows * 5 + 16) cap <<= 1;
    keys_.assign(cap, kEmpty);
    vals_.assign(cap, 0);
    mask_ = cap - 1;

    WindowScan scan;
    for (size_t r = 0; r < reference.size(); ++r) {
      const std::string& seq = reference[r].seq;
      if (seq.size() < static_cast<size_t>(k)) continue;
      if (r > 0xffff) throw std::runtime_error("too many reference records");
      scan.compute(seq, k);
      for (size_t i = 0; i < scan.windows(); ++i) {
        if (!scan.valid(i)) continue;
        insert(scan.canon(i), pack(r, i, scan.flipped(i)));
      }
    }
    uint64_t unique = 0;
    for (size_t i = 0; i < keys_.size(); ++i)
      if (keys_[i] != kEmpty && !(vals_[i] & 1)) ++unique;
    unique_ = unique;
  }

  uint64_t unique_count() const { return unique_; }

  // Returns true when the canonical k-mer occurs exactly once.
  bool lookup(uint64_t canon, uint32_t* rec, uint64_t* pos, bool* flip) const {
    size_t i = hash64(canon) & mask_;
    while (true) {
      if (keys_[i] == kEmpty) return false;
      if (keys_[i] == canon) {
        const uint64_t v = vals_[i];
        if (v & 1) return false;  // duplicated in the reference
        *rec = static_cast<uint32_t>(v >> 48);
        *pos = (v >> 8) & ((uint64_t{1} << 40) - 1);
        *flip = (v >> 1) & 1;
        return true;
      }
      i = (i + 1) & mask_;
    }
  }

 private:
  static constexpr uint64_t kEmpty = ~uint64_t{0};

  static uint64_t pack(size_t rec, uint64_t pos, bool flip) {
    return (static_cast<uint64_t>(rec) << 48) | (pos << 8) | (flip ? 2u : 0u);
  }

  void insert(uint64_t key, uint64_t val) {
    size_t i = hash64(key) & mask_;
    while (true) {
      if (keys_[i] == kEmpty) {
        keys_[i] = key;
        vals_[i] = val;
        return;
      }
      if (keys_[i] == key) {
        vals_[i] |= 1;  // mark duplicate
        return;
      }
      i = (i + 1) & mask_;
    }
  }

  std::vector<uint64_t> keys_;
  std::vector<uint64_t> vals_;
  size_t mask_ = 0;
  uint64_t unique_ = 0;
};

struct Placement {
  uint32_t rec = 0;
  bool reverse = false;
  int64_t offset = 0;
};

}  // namespace

EvalResult coverage_and_errors(std::span<const Contig> contigs,
                               std::span<const FastaRecord> reference, int k) {
  if (k < 3 || k > kMaxK || (k & 1) == 0)
    throw std::invalid_argument("k must be odd and at most 31");
  UniqueKmerIndex index(reference, k);
  if (index.unique_count() == 0)
    throw std::runtime_error("reference has no unique k-mer; cannot anchor contigs");

  std::vector<std::vector<uint8_t>> covered(reference.size());
  for (size_t r = 0; r < reference.size(); ++r) covered[r].assign(reference[r].seq.size(), 0);

  EvalResult res;
  WindowScan scan;
  for (const Contig& contig : contigs) {
    const size_t n = contig.seq.size();
    if (n <= 100) continue;
    scan.compute(contig.seq, k);
    // majority vote over anchor hits; ordered map keeps ties deterministic
    std::map<std::tuple<uint32_t, bool, int64_t>, uint64_t> votes;
    for (size_t i = 0; i < scan.windows(); ++i) {
      if (!scan.valid(i)) continue;
      uint32_t rec;
      uint64_t rpos;
      bool rflip;
      if (!index.lookup(scan.canon(i), &rec, &rpos, &rflip)) continue;
      const bool reverse = rflip != scan.flipped(i);
      const int64_t offset =
          reverse ? static_cast<int64_t>(rpos) - static_cast<int64_t>(n - k - i)
                  : static_cast<int64_t>(rpos) - static_cast<int64_t>(i);
      ++votes[{rec, reverse, offset}];
    }
    if (votes.empty()) {
      ++res.unplaced;
      ++res.e_ge_1;
      ++res.e_ge_3;
      ++res.e_ge_5;
      continue;
    }
    Placement best;
    uint64_t best_votes = 0;
    for (const auto& [key, count] : votes) {
      if (count > best_votes) {
        best_votes = count;
        best = {std::get<0>(key), std::get<1>(key), std::get<2>(key)};
      }
    }
    ++res.placed;
    const std::string& ref = reference[best.rec].seq;
    const std::string oriented = best.reverse ? revcomp_str(contig.seq) : contig.seq;
    uint64_t mismatches = 0;
    for (size_t i = 0; i < n; ++i) {
      const int64_t rp = best.offset + static_cast<int64_t>(i);
      if (rp < 0 || rp >= static_cast<int64_t>(ref.size())) {
        ++mismatches;  // hangs off the linear reference
        continue;
      }
      covered[best.rec][static_cast<size_t>(rp)] = 1;
      if (oriented[i] != ref[static_cast<size_t>(rp)]) ++mismatches;
    }
    if (mismatches >= 1) ++res.e_ge_1;
    if (mismatches >= 3) ++res.e_ge_3;
    if (mismatches >= 5) ++res.e_ge_5;
  }

  uint64_t covered_total = 0, ref_total = 0;
  for (const auto& rec : covered) {
    ref_total += rec.size();
    for (uint8_t b : rec) covered_total += b;
  }
  if (ref_total)
    res.coverage_pct = 100.0 * static_cast<double>(covered_total) / static_cast<double>(ref_total);
  return res;
}

AssemblyReport make_report(std::span<const Contig> contigs) {
  AssemblyReport r;
  r.sizes = size_stats(contigs);
  return r;
}

std::string AssemblyReport::to_text() const {
  char buf[128];
  std::string out;
  auto row = [&](const char* name, const std::string& value) {
    std::snprintf(buf, sizeof(buf), "%-24s %s\n", name, value.c_str());
    out += buf;
  };
  row("Longest contig (bp)", std::to_string(sizes.longest));
  row(">10 kbp (# contigs)", std::to_string(sizes.n_gt_10k));
  row("Sum (bp)", std::to_string(sizes.sum_gt_10k));
  row(">100 bp (# contigs)", std::to_string(sizes.n_gt_100));
  row("Sum (bp)", std::to_string(sizes.sum_gt_100));
  std::snprintf(buf, sizeof(buf), "%.0f", sizes.mean_size);
  row("Mean size (bp)", buf);
  row("N50 (bp)", std::to_string(sizes.n50_bp));
  if (eval) {
    std::snprintf(buf, sizeof(buf), "%.2f", eval->coverage_pct);
    row("Coverage (%)", buf);
    row("E >= 1", std::to_string(eval->e_ge_1));
    row("E >= 3", std::to_string(eval->e_ge_3));
    row("E >= 5", std::to_string(eval->e_ge_5));
  }
  if (graph_peak_bits) {
    std::snprintf(buf, sizeof(buf), "%.2f", static_cast<double>(graph_peak_bits) / 8e6);
    row("Graph peak (MB)", buf);
  }
  return out;
}

std::string AssemblyReport::to_json_line() const {
  nlohmann::json j;
  j["longest_bp"] = sizes.longest;
  j["contigs_gt_10k"] = sizes.n_gt_10k;
  j["sum_gt_10k_bp"] = sizes.sum_gt_10k;
  j["contigs_gt_100"] = sizes.n_gt_100;
  j["sum_gt_100_bp"] = sizes.sum_gt_100;
  j["mean_size_bp"] = sizes.mean_size;
  j["n50_bp"] = sizes.n50_bp;
  if (eval) {
    j["coverage_pct"] = eval->coverage_pct;
    j["e_ge_1"] = eval->e_ge_1;
    j["e_ge_3"] = eval->e_ge_3;
    j["e_ge_5"] = eval->e_ge_5;
    j["contigs_placed"] = eval->placed;
    j["contigs_unplaced"] = eval->unplaced;
  }
  if (graph_final_bits) j["graph_bits"] = graph_final_bits;
  if (graph_peak_bits) j["graph_peak_bits"] = graph_peak_bits;
  return j.dump();
}

}  // namespace skga
