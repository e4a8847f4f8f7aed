#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skga/io.hpp"

namespace skga {

// Largest L such that contigs of length >= L sum to at least half the total.
// The paper computes it over contigs longer than 100 bp; filtering is the
// caller's business. Empty input is defined as 0.
uint64_t n50(std::vector<uint64_t> lengths);

struct SizeStats {
  uint64_t n_gt_100 = 0;
  uint64_t sum_gt_100 = 0;
  uint64_t n_gt_10k = 0;
  uint64_t sum_gt_10k = 0;
  uint64_t longest = 0;
  double mean_size = 0.0;  // over the >100 bp class
  uint64_t n50_bp = 0;     // over the >100 bp class
};

SizeStats size_stats(std::span<const Contig> contigs);

struct EvalResult {
  double coverage_pct = 0.0;
  uint64_t e_ge_1 = 0;
  uint64_t e_ge_3 = 0;
  uint64_t e_ge_5 = 0;
  uint64_t placed = 0;
  uint64_t unplaced = 0;  // no unique-k-mer anchor; counted at every threshold
};

// Places every contig >100 bp on the reference by unique-k-mer anchoring
// (all reference k-mers occurring exactly once are indexed; the contig takes
// the majority-vote offset/strand among its anchor hits) and does a base-wise
// comparison. Throws std::runtime_error if the reference has no unique k-mer.
EvalResult coverage_and_errors(std::span<const Contig> contigs,
                               std::span<const FastaRecord> reference, int k);

// The per-run summary mirroring the layout of the paper-style result tables.
struct AssemblyReport {
  SizeStats sizes;
  std::optional<EvalResult> eval;  // present when a reference was given
  uint64_t graph_final_bits = 0;
  uint64_t graph_peak_bits = 0;

  std::string to_text() const;        // aligned two-column table
  std::string to_json_line() const;   // flat single-line JSON object
};

AssemblyReport make_report(std::span<const Contig> contigs);

}  // namespace skga
