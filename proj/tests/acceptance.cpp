// Acceptance suite: one pass/fail line per criterion.
//
// Criteria 1-2 run at E. coli scale (4.64 Mbp, 3M x 100 bp reads). The
// reference is a seeded random genome with planted short repeat families so
// the contig size distribution lands near the real chromosome's; set
// SKGA_ECOLI_FASTA to a real reference FASTA to run against that instead.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "skga/dense_graph.hpp"
#include "skga/io.hpp"
#include "skga/kmer.hpp"
#include "skga/pipeline.hpp"
#include "skga/simulate.hpp"
#include "skga/sparse_graph.hpp"
#include "skga/stats.hpp"

using namespace skga;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

uint64_t bounded(std::mt19937_64& rng, uint64_t n) {
  return static_cast<uint64_t>((static_cast<__uint128_t>(rng()) * n) >> 64);
}

// 4.64 Mbp seeded genome with three planted families of 62-70 bp repeat
// elements (some inverted), spaced well apart. Short repeats fragment the
// assembly the way the real chromosome's repeat elements do while keeping
// every repeat contig under the 100 bp reporting cutoff.
std::string ecoli_like_genome(uint64_t seed) {
  if (const char* real = std::getenv("SKGA_ECOLI_FASTA")) {
    std::string genome;
    for (auto& rec : read_fasta_records(real)) genome += rec.seq;
    return genome;
  }
  const size_t len = 4641652;
  std::string genome = random_genome(len, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  const int family_len[3] = {62, 66, 70};
  const int family_copies[3] = {100, 95, 85};
  std::vector<size_t> placed;
  for (int f = 0; f < 3; ++f) {
    const std::string element = random_genome(family_len[f], rng());
    const std::string element_rc = revcomp_str(element);
    for (int c = 0; c < family_copies[f];) {
      const size_t pos = 3000 + bounded(rng, len - 6000);
      bool ok = true;
      for (size_t other : placed) {
        const size_t d = pos > other ? pos - other : other - pos;
        if (d < 2000) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      placed.push_back(pos);
      const bool invert = bounded(rng, 100) < 15;
      genome.replace(pos, element.size(), invert ? element_rc : element);
      ++c;
    }
  }
  return genome;
}

struct ScaleRun {
  AssembleResult result;
  SparseGraph graph;
  EvalResult eval;
  SizeStats sizes;
  double assemble_seconds = 0;
};

ScaleRun run_scale(const std::string& reads_path, const std::string& genome,
                   const GraphParams& params) {
  ScaleRun run;
  FastxReader reads({reads_path});
  AssembleOptions opts;
  opts.keep_graph = &run.graph;
  const auto t0 = std::chrono::steady_clock::now();
  run.result = assemble(reads, params, opts);
  run.assemble_seconds = seconds_since(t0);
  run.sizes = size_stats(run.result.contigs);
  FastaRecord ref{"ref", genome};
  run.eval = coverage_and_errors(run.result.contigs, {&ref, 1}, params.k);
  return run;
}

bool run_cli(const std::string& args) {
  const std::string cmd = std::string(SKGA_CLI_PATH) + " " + args + " 2>/dev/null";
  return std::system(cmd.c_str()) == 0;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// -- criterion 5 helpers ----------------------------------------------------

// Lays nodes every `stride` along seq and links consecutive ones `count`
// times through the public graph API. Returns the node positions.
std::vector<size_t> build_chain(SparseGraph& graph, const std::string& seq, int stride,
                                uint32_t count) {
  const int k = graph.params().k;
  std::vector<size_t> positions;
  for (size_t p = 0; p + k <= seq.size(); p += stride) positions.push_back(p);
  for (size_t i = 0; i < positions.size(); ++i) {
    uint64_t bits = 0;
    if (!encode_kmer(seq.substr(positions[i], k), k, &bits)) std::abort();
    const CanonicalKmer c = canonicalize(bits, k);
    const auto id = graph.get_or_insert_node(c).first;
    graph.set_coverage(id, std::max(graph.coverage(id), count));
    if (i == 0) continue;
    const size_t prev = positions[i - 1];
    const int m = static_cast<int>(positions[i] - prev);
    uint64_t prev_bits = 0;
    if (!encode_kmer(seq.substr(prev, k), k, &prev_bits)) std::abort();
    const CanonicalKmer pc = canonicalize(prev_bits, k);
    uint64_t label = 0;
    if (!encode_kmer(seq.substr(prev + k, m), m, &label)) std::abort();
    const auto src = graph.find(pc.bits);
    const auto dst = graph.find(c.bits);
    const Side src_side = pc.flipped ? Side::Left : Side::Right;
    const Side dst_entry = c.flipped ? Side::Right : Side::Left;
    for (uint32_t n = 0; n < count; ++n)
      graph.add_or_bump_link(src, src_side, label, m, dst, dst_entry);
  }
  return positions;
}

}  // namespace

// -- criteria ---------------------------------------------------------------

void criterion_1_and_2_and_7(const fs::path& work) {
  const std::string genome = ecoli_like_genome(20260521);
  const std::string ref_path = (work / "ecoli_ref.fasta").string();
  {
    std::ofstream out(ref_path);
    write_fasta_record(out, "synthetic_ecoli", genome);
  }

  GraphParams params;  // k=31 g=25
  params.min_node_cov = 0;
  params.min_link_cov = 0;

  // --- criterion 1: noise-free reproduction -------------------------------
  const std::string reads_nf = (work / "reads_nf.fasta").string();
  const auto t0 = std::chrono::steady_clock::now();
  {
    std::ofstream out(reads_nf);
    simulate_to_fasta(out, genome, 100, 3000000, {0.0, 0.0}, 101);
  }
  ScaleRun nf = run_scale(reads_nf, genome, params);

  FastxReader reads({reads_nf});
  DenseGraph dense = build_dense(reads, params.k);
  const double mem_ratio = static_cast<double>(nf.graph.measured_bits()) /
                           static_cast<double>(dense.measured_bits());
  const double total_s = seconds_since(t0);

  const bool pass1 = nf.eval.coverage_pct >= 97.0 && nf.sizes.n50_bp >= 14000 &&
                     nf.eval.e_ge_1 == 0 && mem_ratio <= 0.25 && total_s <= 600.0;
  report(1, pass1,
         fmt("noise-free E. coli scale: coverage=%.2f%% (>=97, paper 98.11), "
             "N50=%llu (>=14000, paper 28478), E>=1: %llu (==0), "
             "sparse/dense bits=%.3f (<=0.25), runtime=%.0fs (<=600)",
             nf.eval.coverage_pct, (unsigned long long)nf.sizes.n50_bp,
             (unsigned long long)nf.eval.e_ge_1, mem_ratio, total_s));
  std::printf("       contigs>100bp=%llu sum=%llu longest=%llu nodes=%llu "
              "dense_kmers=%llu chain_breaks=%llu\n",
              (unsigned long long)nf.sizes.n_gt_100, (unsigned long long)nf.sizes.sum_gt_100,
              (unsigned long long)nf.sizes.longest, (unsigned long long)nf.graph.node_count(),
              (unsigned long long)dense.node_count(),
              (unsigned long long)nf.result.counters.chain_breaks);

  // the module-level memory invariant, asserted at scale
  const double s1_ratio = static_cast<double>(nf.graph.measured_bits()) /
                          static_cast<double>(estimate_dense_bits(dense.node_count(), 31));
  if (s1_ratio > 0.25)
    report(1, false, fmt("sparse store exceeds 0.25*S1: %.3f", s1_ratio));

  // --- criterion 7: determinism across thread counts via the CLI ----------
  {
    const std::string c1 = (work / "c_t1.fasta").string();
    const std::string c8 = (work / "c_t8.fasta").string();
    const std::string j1 = (work / "s_t1.json").string();
    const std::string j8 = (work / "s_t8.json").string();
    const std::string flags = " --min-node-cov 0 --min-link-cov 0 -i " + reads_nf;
    const bool ok1 = run_cli("assemble" + flags + " --threads 1 -o " + c1 +
                             " --stats-json " + j1);
    const bool ok8 = run_cli("assemble" + flags + " --threads 8 -o " + c8 +
                             " --stats-json " + j8);
    const bool identical = ok1 && ok8 && !slurp(c1).empty() && slurp(c1) == slurp(c8) &&
                           slurp(j1) == slurp(j8);
    report(7, identical,
           fmt("byte-identical contig FASTA and stats JSON for --threads 1 vs 8 "
               "(contigs=%zu bytes, stats=%zu bytes)",
               slurp(c1).size(), slurp(j1).size()));
    fs::remove(c1);
    fs::remove(c8);
  }
  fs::remove(reads_nf);

  // --- criterion 2: error mode ---------------------------------------------
  const std::string reads_err = (work / "reads_err.fasta").string();
  uint64_t substitutions = 0;
  {
    std::ofstream out(reads_err);
    substitutions = simulate_to_fasta(out, genome, 100, 3000000, {0.005, 0.02}, 202);
  }
  GraphParams err_params;
  err_params.min_node_cov = 2;
  err_params.min_link_cov = 2;
  ScaleRun er = run_scale(reads_err, genome, err_params);
  fs::remove(reads_err);

  const bool pass2 = er.eval.coverage_pct >= 94.0 && er.eval.e_ge_5 <= 5 &&
                     er.sizes.n50_bp >= 10000;
  report(2, pass2,
         fmt("error mode (%.2fM substitutions): coverage=%.2f%% (>=94, paper 97.89), "
             "E>=5: %llu (<=5, paper 1), N50=%llu (>=10000, paper 24740)",
             static_cast<double>(substitutions) / 1e6, er.eval.coverage_pct,
             (unsigned long long)er.eval.e_ge_5, (unsigned long long)er.sizes.n50_bp));
  std::printf("       contigs>100bp=%llu E>=1=%llu E>=3=%llu tips=%llu bubbles=%llu "
              "filtered=%llu assemble=%.0fs\n",
              (unsigned long long)er.sizes.n_gt_100, (unsigned long long)er.eval.e_ge_1,
              (unsigned long long)er.eval.e_ge_3,
              (unsigned long long)er.result.counters.tips_removed,
              (unsigned long long)er.result.counters.bubbles_removed,
              (unsigned long long)er.result.counters.nodes_filtered, er.assemble_seconds);
}

void criterion_3() {
  const uint64_t s1 = estimate_dense_bits(4000000, 31);
  const uint64_t s2 = estimate_sparse_bits(4000000, 31, 25, 64);
  const double ratio = static_cast<double>(s2) / static_cast<double>(s1);
  const bool pass = s1 == 280000000ull && s2 == 36160000ull && ratio >= 0.1290 &&
                    ratio <= 0.1292;
  report(3, pass,
         fmt("memory formulas: S1=%llu (==280000000), S2=%llu (==36160000), ratio=%.4f "
             "(0.1291 +/- 0.0001)",
             (unsigned long long)s1, (unsigned long long)s2, ratio));
}

void criterion_4() {
  GraphParams params;
  params.min_node_cov = 0;
  params.min_link_cov = 0;
  int bad = 0;
  std::string first_fail;
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    const size_t len = 5000 + (seed * 7919) % 15001;  // 5-20 kbp
    const std::string genome = random_genome(len, seed * 1000 + 7);
    const std::string genome_rc = revcomp_str(genome);
    std::vector<std::string> reads_vec;
    for (size_t s = 0;; s += 10) {
      if (s + 100 >= genome.size()) {
        reads_vec.push_back(genome.substr(genome.size() - 100));
        break;
      }
      reads_vec.push_back(genome.substr(s, 100));
    }
    VectorReads reads(reads_vec);
    AssembleResult res = assemble(reads, params);
    DenseGraph dense = build_dense(reads, params.k);
    auto unitigs = dense.extract_unitigs(100);

    FastaRecord ref{"ref", genome};
    const double cov_sparse =
        coverage_and_errors(res.contigs, {&ref, 1}, params.k).coverage_pct;
    const double cov_dense = coverage_and_errors(unitigs, {&ref, 1}, params.k).coverage_pct;
    bool ok = std::abs(cov_sparse - cov_dense) < 1.0;
    for (const auto& contig : res.contigs) {
      if (genome.find(contig.seq) == std::string::npos &&
          genome_rc.find(contig.seq) == std::string::npos)
        ok = false;
    }
    if (!ok) {
      ++bad;
      if (first_fail.empty())
        first_fail = fmt(" first failure: seed=%llu len=%zu sparse=%.2f dense=%.2f",
                         (unsigned long long)seed, len, cov_sparse, cov_dense);
    }
  }
  report(4, bad == 0,
         fmt("oracle equivalence on 50 random 5-20 kbp genomes: %d failures "
             "(coverage delta <1%%, contigs exact substrings)%s",
             bad, first_fail.c_str()));
}

void criterion_5() {
  GraphParams params;
  params.min_node_cov = 0;
  params.min_link_cov = 0;
  bool pass = true;
  std::string detail;

  // chain + bubble + tip, built directly in the graph
  {
    SparseGraph graph(params);
    const std::string s = random_genome(406, 5150);  // 16 nodes at stride 25
    std::string variant = s;
    variant[200] = variant[200] == 'G' ? 'T' : 'G';
    std::string tip = s.substr(250, 56) + random_genome(50, 5151);

    build_chain(graph, s, 25, 10);
    build_chain(graph, variant, 25, 2);
    build_chain(graph, tip, 25, 2);
    const auto before = graph.validate_structure();
    auto [tips, bubbles] = remove_tips_and_bubbles(graph, params.effective_tip_depth());
    auto contigs = extract_contigs(graph, 100);
    const std::string canon = std::min(s, revcomp_str(s));
    const bool ok = before.empty() && tips >= 1 && bubbles >= 1 && contigs.size() == 1 &&
                    contigs[0].seq == canon && graph.validate_structure().empty();
    if (!ok) {
      pass = false;
      detail += fmt(" [graph topology: tips=%llu bubbles=%llu contigs=%zu match=%d]",
                    (unsigned long long)tips, (unsigned long long)bubbles, contigs.size(),
                    contigs.size() == 1 && contigs[0].seq == canon);
    }
  }

  // a 20% variant branch injected through reads always loses
  {
    const std::string genome = random_genome(50000, 5152);
    std::string variant = genome;
    variant[25000] = variant[25000] == 'A' ? 'C' : 'A';
    std::vector<std::string> reads_vec;
    auto tile = [&](const std::string& src, int copies) {
      for (int c = 0; c < copies; ++c)
        for (size_t p = 0; p + 100 <= src.size(); p += 11)
          reads_vec.push_back(src.substr(p, 100));
    };
    tile(genome, 8);
    tile(variant, 2);
    VectorReads reads(reads_vec);
    AssembleResult res = assemble(reads, params);
    const std::string genome_rc = revcomp_str(genome);
    bool ok = !res.contigs.empty();
    bool variant_site_seen = false;
    const std::string majority_context = genome.substr(24990, 21);
    for (const auto& contig : res.contigs) {
      if (genome.find(contig.seq) == std::string::npos &&
          genome_rc.find(contig.seq) == std::string::npos)
        ok = false;  // a surviving variant branch would not match the majority
      if (contig.seq.find(majority_context) != std::string::npos ||
          contig.seq.find(revcomp_str(majority_context)) != std::string::npos)
        variant_site_seen = true;
    }
    if (!(ok && variant_site_seen)) {
      pass = false;
      detail += fmt(" [20%% variant: clean=%d site_covered=%d contigs=%zu]", ok,
                    variant_site_seen, res.contigs.size());
    }
  }

  // a branch-free graph is a fixed point
  {
    SparseGraph graph(params);
    build_chain(graph, random_genome(406, 5153), 25, 5);
    const uint64_t nodes = graph.node_count();
    const uint64_t links = graph.live_link_count();
    auto [tips, bubbles] = remove_tips_and_bubbles(graph, params.effective_tip_depth());
    if (tips || bubbles || graph.node_count() != nodes || graph.live_link_count() != links) {
      pass = false;
      detail += " [fixed point violated]";
    }
  }

  report(5, pass,
         "bubble/tip suite: graph-built chain+bubble+tip reduces to the chain, 20%% "
         "variant branch removed, branch-free graph unchanged" +
             detail);
}

void criterion_6() {
  bool pass = true;
  std::string detail;

  // codec properties, 1e5 random k-mers per k
  std::mt19937_64 rng(606);
  for (int k : {15, 21, 31}) {
    for (int i = 0; i < 100000; ++i) {
      const uint64_t x = rng() & kmer_mask(k);
      uint64_t back = 0;
      if (!encode_kmer(decode_kmer(x, k), k, &back) || back != x) {
        pass = false;
        detail += fmt(" [roundtrip k=%d]", k);
        break;
      }
      const uint64_t rc = revcomp_bits(x, k);
      const CanonicalKmer c = canonicalize(x, k);
      if (revcomp_bits(rc, k) != x || rc == x || canonicalize(c.bits, k).bits != c.bits ||
          canonicalize(rc, k).bits != c.bits) {
        pass = false;
        detail += fmt(" [canonical k=%d]", k);
        break;
      }
    }
  }

  // structural invariants after every pipeline stage on a toy input
  {
    const std::string genome = random_genome(4000, 607);
    std::vector<std::string> reads_vec;
    for (int c = 0; c < 3; ++c)
      for (size_t p = 0; p + 100 <= genome.size(); p += 13)
        reads_vec.push_back(genome.substr(p, 100));
    reads_vec.push_back(genome.substr(1000, 60) + random_genome(40, 608));  // one tip
    VectorReads reads(reads_vec);
    GraphParams params;
    params.k = 21;
    params.g = 10;
    params.min_node_cov = 0;
    params.min_link_cov = 2;
    StageCounters c;
    KmerCountTable cand = round1_select_nodes(reads, params, c);
    filter_low_coverage_nodes(cand, params.min_node_cov);
    SparseGraph graph = build_graph(cand, params);
    round2_build_links(reads, graph, c);
    if (!graph.validate_structure().empty()) {
      pass = false;
      detail += " [invariants after round2]";
    }
    remove_weak_links(graph, params.min_link_cov, params.min_node_cov);
    if (!graph.validate_structure().empty()) {
      pass = false;
      detail += " [invariants after weak-link removal]";
    }
    remove_tips_and_bubbles(graph, params.effective_tip_depth());
    if (!graph.validate_structure().empty()) {
      pass = false;
      detail += " [invariants after tip/bubble removal]";
    }
    extract_contigs(graph, 100);
    if (!graph.validate_structure().empty()) {
      pass = false;
      detail += " [invariants after traversal]";
    }
  }

  // N50 definitional cases
  if (n50({5000, 4000, 3000, 2000, 1000}) != 4000 || n50({777}) != 777 || n50({}) != 0) {
    pass = false;
    detail += " [n50]";
  }

  // g-gap invariant: no chain break on noise-free input
  {
    const std::string genome = random_genome(60000, 609);
    ReadSimulator sim(genome, 100, 30000, {0.0, 0.0}, 610);
    GraphParams params;
    AssembleOptions opts;
    params.min_node_cov = 0;
    params.min_link_cov = 0;
    AssembleResult res = assemble(sim, params, opts);
    if (res.counters.chain_breaks != 0) {
      pass = false;
      detail += fmt(" [g-gap: %llu breaks]", (unsigned long long)res.counters.chain_breaks);
    }
  }

  report(6, pass,
         "invariant suites: codec properties (3x100k k-mers), link mirror/label "
         "consistency after every stage, N50 definition, g-gap" +
             detail);
}

int main() {
  fs::path work = fs::temp_directory_path() / "skga_acceptance";
  fs::create_directories(work);

  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_1_and_2_and_7(work);

  fs::remove_all(work);
  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria FAILED\n", g_failures);
  return 1;
}
