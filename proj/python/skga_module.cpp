#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "skga/dense_graph.hpp"
#include "skga/io.hpp"
#include "skga/kmer.hpp"
#include "skga/pipeline.hpp"
#include "skga/simulate.hpp"
#include "skga/sparse_graph.hpp"
#include "skga/stats.hpp"

namespace py = pybind11;
using namespace skga;

namespace {

GraphParams make_params(int k, int g, uint32_t min_node_cov, uint32_t min_link_cov,
                        uint32_t tip_depth) {
  GraphParams p;
  p.k = k;
  p.g = g;
  p.min_node_cov = min_node_cov;
  p.min_link_cov = min_link_cov;
  p.tip_depth_limit = tip_depth;
  p.validate();
  return p;
}

py::dict counters_dict(const StageCounters& c) {
  py::dict d;
  d["reads"] = c.reads;
  d["bases"] = c.bases;
  d["round1_nodes_selected"] = c.round1_nodes_selected;
  d["nodes_filtered"] = c.nodes_filtered;
  d["round2_hits"] = c.round2_hits;
  d["links_built"] = c.links_built;
  d["chain_breaks"] = c.chain_breaks;
  d["weak_links_removed"] = c.weak_links_removed;
  d["tips_removed"] = c.tips_removed;
  d["bubbles_removed"] = c.bubbles_removed;
  d["final_nodes"] = c.final_nodes;
  d["final_links"] = c.final_links;
  d["graph_bits"] = c.graph_final_bits;
  d["graph_peak_bits"] = c.graph_peak_bits;
  return d;
}

py::list contigs_list(const std::vector<Contig>& contigs) {
  py::list out;
  for (const auto& c : contigs) out.append(py::make_tuple(c.seq, c.mean_cov));
  return out;
}

}  // namespace

PYBIND11_MODULE(_skga, m) {
  m.doc() = "sparse k-mer graph assembler";

  m.def("reverse_complement", [](const std::string& s) { return revcomp_str(s); }, py::arg("seq"));

  m.def(
      "canonicalize",
      [](const std::string& kmer) {
        uint64_t bits = 0;
        const int k = static_cast<int>(kmer.size());
        if (!encode_kmer(kmer, k, &bits))
          throw py::value_error("k-mer must be ACGT only");
        const CanonicalKmer c = canonicalize(bits, k);
        return py::make_tuple(decode_kmer(c.bits, k), c.flipped);
      },
      py::arg("kmer"), "Returns (canonical k-mer, flipped).");

  m.def(
      "kmer_positions",
      [](const std::string& read, int k) {
        py::list out;
        for (const auto& w : kmer_windows(read, k))
          out.append(py::make_tuple(w.pos, decode_kmer(w.canon, k), w.flipped));
        return out;
      },
      py::arg("read"), py::arg("k"),
      "Canonical k-mers of every fully-ACGT window of the read.");

  m.def("estimate_dense_bits", &estimate_dense_bits, py::arg("n_kmers"), py::arg("k"));
  m.def("estimate_sparse_bits", &estimate_sparse_bits, py::arg("n_kmers"), py::arg("k"),
        py::arg("g"), py::arg("ptr_bits") = 64);

  m.def("random_genome", &random_genome, py::arg("length"), py::arg("seed"));

  m.def(
      "simulate_reads",
      [](const std::string& genome, size_t read_len, uint64_t n_reads, double err5,
         double err3, uint64_t seed) {
        ReadSimulator sim(genome, read_len, n_reads, {err5, err3}, seed);
        std::vector<std::string> reads;
        reads.reserve(n_reads);
        std::string seq;
        while (sim.next(seq)) reads.push_back(seq);
        return reads;
      },
      py::arg("genome"), py::arg("read_len"), py::arg("n_reads"), py::arg("err5") = 0.0,
      py::arg("err3") = 0.0, py::arg("seed") = 1);

  m.def(
      "assemble",
      [](const std::vector<std::string>& reads, int k, int g, uint32_t min_node_cov,
         uint32_t min_link_cov, uint32_t tip_depth, size_t min_contig_len, int threads) {
        VectorReads src(reads);
        AssembleOptions opts;
        opts.threads = threads;
        opts.min_contig_len = min_contig_len;
        AssembleResult res =
            assemble(src, make_params(k, g, min_node_cov, min_link_cov, tip_depth), opts);
        return py::make_tuple(contigs_list(res.contigs), counters_dict(res.counters));
      },
      py::arg("reads"), py::arg("k") = 31, py::arg("g") = 25, py::arg("min_node_cov") = 2,
      py::arg("min_link_cov") = 2, py::arg("tip_depth") = 0, py::arg("min_contig_len") = 100,
      py::arg("threads") = 1,
      "Assembles reads; returns ([(contig, mean_cov)...], stage_counters).");

  m.def(
      "dense_unitigs",
      [](const std::vector<std::string>& reads, int k, size_t min_len) {
        VectorReads src(reads);
        DenseGraph g = build_dense(src, k);
        auto unitigs = g.extract_unitigs(min_len);
        return py::make_tuple(contigs_list(unitigs), g.node_count(), g.measured_bits());
      },
      py::arg("reads"), py::arg("k") = 31, py::arg("min_len") = 100,
      "Dense de Bruijn oracle; returns (unitigs, distinct_kmers, measured_bits).");

  m.def(
      "n50",
      [](const std::vector<uint64_t>& lengths) { return n50(lengths); },
      py::arg("lengths"));

  m.def(
      "evaluate",
      [](const std::vector<std::string>& contigs, const std::string& reference, int k) {
        std::vector<Contig> cs;
        cs.reserve(contigs.size());
        for (const auto& s : contigs) cs.push_back({s, 0.0});
        FastaRecord ref{"ref", reference};
        const EvalResult r = coverage_and_errors(cs, {&ref, 1}, k);
        py::dict d;
        d["coverage_pct"] = r.coverage_pct;
        d["e_ge_1"] = r.e_ge_1;
        d["e_ge_3"] = r.e_ge_3;
        d["e_ge_5"] = r.e_ge_5;
        d["placed"] = r.placed;
        d["unplaced"] = r.unplaced;
        return d;
      },
      py::arg("contigs"), py::arg("reference"), py::arg("k") = 31,
      "Unique-k-mer anchored base-wise comparison against a reference.");
}
