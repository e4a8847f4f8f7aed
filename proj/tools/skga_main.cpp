#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skga/dense_graph.hpp"
#include "skga/io.hpp"
#include "skga/kmer.hpp"
#include "skga/pipeline.hpp"
#include "skga/simulate.hpp"
#include "skga/sparse_graph.hpp"
#include "skga/stats.hpp"

namespace {

using nlohmann::json;

void write_json_line(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump() << '\n';
}

json counters_json(const skga::StageCounters& c) {
  json j;
  j["reads"] = c.reads;
  j["bases"] = c.bases;
  j["round1_nodes_selected"] = c.round1_nodes_selected;
  j["round1_hits"] = c.round1_hits;
  j["nodes_filtered"] = c.nodes_filtered;
  j["round2_hits"] = c.round2_hits;
  j["link_events"] = c.link_events;
  j["links_built"] = c.links_built;
  j["chain_breaks"] = c.chain_breaks;
  j["weak_links_removed"] = c.weak_links_removed;
  j["isolated_nodes_removed"] = c.isolated_nodes_removed;
  j["tips_removed"] = c.tips_removed;
  j["bubbles_removed"] = c.bubbles_removed;
  j["contigs"] = c.contigs;
  j["contigs_dropped_short"] = c.contigs_dropped_short;
  j["final_nodes"] = c.final_nodes;
  j["final_links"] = c.final_links;
  return j;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += v[i];
  }
  return s;
}

int run_assemble(const std::vector<std::string>& inputs, const std::string& output,
                 const skga::GraphParams& params, int threads, size_t min_contig_len,
                 const std::string& stats_json, const std::string& dump_graph) {
  std::cerr << "params cmd=assemble k=" << params.k << " g=" << params.g
            << " min_node_cov=" << params.min_node_cov
            << " min_link_cov=" << params.min_link_cov
            << " tip_depth=" << params.effective_tip_depth()
            << " min_contig_len=" << min_contig_len << " threads=" << threads
            << " inputs=" << join(inputs) << " output=" << output << '\n';

  skga::FastxReader reads(inputs);
  skga::SparseGraph graph;
  skga::AssembleOptions opts;
  opts.threads = threads;
  opts.min_contig_len = min_contig_len;
  opts.log = &std::cerr;
  opts.keep_graph = &graph;
  skga::AssembleResult result = skga::assemble(reads, params, opts);

  skga::write_contigs_fasta(output, result.contigs);
  if (!dump_graph.empty()) {
    std::ofstream out(dump_graph);
    if (!out) throw std::runtime_error("cannot open " + dump_graph + " for writing");
    graph.dump(out);
  }
  skga::AssemblyReport report = skga::make_report(result.contigs);
  report.graph_final_bits = result.counters.graph_final_bits;
  report.graph_peak_bits = result.counters.graph_peak_bits;
  std::cout << report.to_text();
  if (!stats_json.empty()) {
    json j = json::parse(report.to_json_line());
    j.update(counters_json(result.counters));
    j["k"] = params.k;
    j["g"] = params.g;
    write_json_line(stats_json, j);
  }
  return 0;
}

int run_simulate(const std::string& genome_file, uint64_t genome_len, uint64_t n_reads,
                 size_t read_len, double err5, double err3, uint64_t seed,
                 const std::string& prefix, bool fastq) {
  std::cerr << "params cmd=simulate genome_len=" << genome_len << " genome=" << genome_file
            << " reads=" << n_reads << " read_len=" << read_len << " err5=" << err5
            << " err3=" << err3 << " seed=" << seed << " out=" << prefix << '\n';
  std::string genome;
  if (!genome_file.empty()) {
    auto records = skga::read_fasta_records(genome_file);
    if (records.empty()) throw std::runtime_error("reference " + genome_file + " is empty");
    for (auto& rec : records) genome += rec.seq;  // concatenated for read drawing
  } else {
    genome = skga::random_genome(genome_len, seed);
  }
  const std::string ref_path = prefix + ".ref.fasta";
  {
    std::ofstream out(ref_path);
    if (!out) throw std::runtime_error("cannot open " + ref_path + " for writing");
    skga::write_fasta_record(out, "reference len=" + std::to_string(genome.size()), genome);
  }
  const std::string reads_path = prefix + (fastq ? ".reads.fastq" : ".reads.fasta");
  std::ofstream out(reads_path);
  if (!out) throw std::runtime_error("cannot open " + reads_path + " for writing");
  const uint64_t subs = skga::simulate_to_fasta(out, genome, read_len, n_reads,
                                                {err5, err3}, seed, fastq);
  std::cerr << "stage=simulate reads=" << n_reads << " substitutions=" << subs
            << " reads_file=" << reads_path << " ref_file=" << ref_path << '\n';
  return 0;
}

int run_evaluate(const std::string& contigs_path, const std::string& reference_path, int k,
                 const std::string& stats_json) {
  std::cerr << "params cmd=evaluate contigs=" << contigs_path
            << " reference=" << reference_path << " k=" << k << '\n';
  auto contig_records = skga::read_fasta_records(contigs_path);
  std::vector<skga::Contig> contigs;
  contigs.reserve(contig_records.size());
  for (auto& rec : contig_records) contigs.push_back({std::move(rec.seq), 0.0});
  auto reference = skga::read_fasta_records(reference_path);
  skga::AssemblyReport report = skga::make_report(contigs);
  report.eval = skga::coverage_and_errors(contigs, reference, k);
  std::cout << report.to_text();
  if (!stats_json.empty()) write_json_line(stats_json, json::parse(report.to_json_line()));
  return 0;
}

int run_estimate(uint64_t kmers, int k, int g, int ptr_bits) {
  const uint64_t s1 = skga::estimate_dense_bits(kmers, k);
  const uint64_t s2 = skga::estimate_sparse_bits(kmers, k, g, ptr_bits);
  const double ratio = s1 ? static_cast<double>(s2) / static_cast<double>(s1) : 0.0;
  char line[160];
  std::snprintf(line, sizeof(line),
                "S1=%llu bits (%.2f MB)\nS2=%llu bits (%.2f MB)\nratio=%.4f saving=%.1f%%\n",
                static_cast<unsigned long long>(s1), static_cast<double>(s1) / 8e6,
                static_cast<unsigned long long>(s2), static_cast<double>(s2) / 8e6, ratio,
                100.0 * (1.0 - ratio));
  std::cout << line;
  return 0;
}

int run_oracle(const std::vector<std::string>& inputs, const std::string& output, int k,
               size_t min_contig_len, const std::string& stats_json,
               const std::string& dump_graph) {
  std::cerr << "params cmd=oracle k=" << k << " min_contig_len=" << min_contig_len
            << " inputs=" << join(inputs) << " output=" << output << '\n';
  skga::FastxReader reads(inputs);
  skga::DenseGraph graph = skga::build_dense(reads, k);
  std::cerr << "stage=dense_build nodes=" << graph.node_count()
            << " graph_bits=" << graph.measured_bits() << '\n';
  auto unitigs = graph.extract_unitigs(min_contig_len);
  skga::write_contigs_fasta(output, unitigs);
  if (!dump_graph.empty()) {
    std::ofstream out(dump_graph);
    if (!out) throw std::runtime_error("cannot open " + dump_graph + " for writing");
    graph.dump(out);
  }
  skga::AssemblyReport report = skga::make_report(unitigs);
  report.graph_final_bits = graph.measured_bits();
  report.graph_peak_bits = graph.measured_bits();
  std::cout << report.to_text();
  if (!stats_json.empty()) {
    json j = json::parse(report.to_json_line());
    j["k"] = k;
    j["dense_nodes"] = graph.node_count();
    write_json_line(stats_json, j);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse k-mer graph assembler"};
  app.require_subcommand(1);

  const CLI::Validator check_k(
      [](std::string& s) -> std::string {
        try {
          if (!skga::valid_k(std::stoi(s))) return "k must be odd and in [15,31]";
        } catch (...) {
          return "k must be an integer";
        }
        return {};
      },
      "ODD_K");

  // assemble
  auto* assemble = app.add_subcommand("assemble", "assemble reads into contigs");
  std::vector<std::string> inputs;
  std::string output = "contigs.fasta", stats_json, dump_graph;
  skga::GraphParams params;
  int threads = 1;
  size_t min_contig_len = 100;
  assemble->add_option("-i,--input", inputs, "input FASTA/FASTQ file(s)")
      ->required()
      ->check(CLI::ExistingFile);
  assemble->add_option("-o,--output", output, "output contig FASTA");
  assemble->add_option("-k", params.k, "k-mer size (odd, 15-31)")
      ->default_val(31)
      ->check(check_k);
  assemble->add_option("-g", params.g, "skip distance between stored k-mers")
      ->default_val(25)
      ->check(CLI::Range(1, 31));
  assemble->add_option("--min-node-cov", params.min_node_cov,
                       "drop round-1 nodes below this coverage (0/1 disables)")
      ->default_val(2);
  assemble->add_option("--min-link-cov", params.min_link_cov,
                       "drop links below this count (0/1 disables)")
      ->default_val(2);
  assemble->add_option("--tip-depth", params.tip_depth_limit,
                       "tip/bubble search depth in bases (0 = 2*(k+g))")
      ->default_val(0);
  assemble->add_option("--min-contig-len", min_contig_len, "shortest contig to emit")
      ->default_val(100);
  assemble->add_option("--threads", threads, "worker threads for the link pass")
      ->default_val(1)
      ->check(CLI::Range(1, 256));
  assemble->add_option("--stats-json", stats_json, "write run statistics to this file");
  assemble->add_option("--dump-graph", dump_graph, "write a plain-text graph dump");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "simulate a genome and shotgun reads");
  std::string sim_genome, sim_prefix = "sim";
  uint64_t genome_len = 100000, sim_reads = 50000, sim_seed = 1;
  size_t sim_read_len = 100;
  double err5 = 0.0, err3 = 0.0;
  bool sim_fastq = false;
  auto* glen_opt = simulate->add_option("--genome-len", genome_len,
                                        "length of the random genome to generate");
  simulate->add_option("--genome", sim_genome, "simulate from this reference FASTA instead")
      ->check(CLI::ExistingFile)
      ->excludes(glen_opt);
  simulate->add_option("--reads", sim_reads, "number of reads")->default_val(50000);
  simulate->add_option("--read-len", sim_read_len, "read length")->default_val(100);
  simulate->add_option("--err5", err5, "substitution rate at the 5' end")
      ->default_val(0.0)
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--err3", err3, "substitution rate at the 3' end")
      ->default_val(0.0)
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--seed", sim_seed, "random seed")->default_val(1);
  simulate->add_option("-o,--out-prefix", sim_prefix, "output prefix")->default_val("sim");
  simulate->add_flag("--fastq", sim_fastq, "emit FASTQ with dummy qualities");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "compare contigs against a reference");
  std::string eval_contigs, eval_reference, eval_stats;
  int eval_k = 31;
  evaluate->add_option("--contigs", eval_contigs, "contig FASTA")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--reference", eval_reference, "reference FASTA")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("-k", eval_k, "anchoring k-mer size")
      ->default_val(31)
      ->check(check_k);
  evaluate->add_option("--stats-json", eval_stats, "write statistics to this file");

  // estimate-mem
  auto* estimate = app.add_subcommand("estimate-mem", "evaluate the memory cost formulas");
  uint64_t est_kmers = 0;
  int est_k = 31, est_g = 25, est_ptr = 64;
  estimate->add_option("--kmers", est_kmers, "distinct k-mer count N")->required();
  estimate->add_option("-k", est_k, "k-mer size")
      ->default_val(31)
      ->check(check_k);
  estimate->add_option("-g", est_g, "skip distance")->default_val(25)->check(CLI::Range(1, 31));
  estimate->add_option("--ptr-bits", est_ptr, "per-node link structure overhead in bits")
      ->default_val(64)
      ->check(CLI::Range(0, 4096));

  // oracle
  auto* oracle = app.add_subcommand("oracle", "dense de Bruijn assembly (small inputs)");
  std::vector<std::string> oracle_inputs;
  std::string oracle_output = "unitigs.fasta", oracle_stats, oracle_dump;
  int oracle_k = 31;
  size_t oracle_min_len = 100;
  oracle->add_option("-i,--input", oracle_inputs, "input FASTA/FASTQ file(s)")
      ->required()
      ->check(CLI::ExistingFile);
  oracle->add_option("-o,--output", oracle_output, "output unitig FASTA");
  oracle->add_option("-k", oracle_k, "k-mer size (odd, 15-31)")
      ->default_val(31)
      ->check(check_k);
  oracle->add_option("--min-contig-len", oracle_min_len, "shortest unitig to emit")
      ->default_val(100);
  oracle->add_option("--stats-json", oracle_stats, "write statistics to this file");
  oracle->add_option("--dump-graph", oracle_dump, "write a plain-text graph dump");

  CLI11_PARSE(app, argc, argv);

  try {
    if (assemble->parsed()) {
      params.validate();
      return run_assemble(inputs, output, params, threads, min_contig_len, stats_json,
                          dump_graph);
    }
    if (simulate->parsed())
      return run_simulate(sim_genome, genome_len, sim_reads, sim_read_len, err5, err3,
                          sim_seed, sim_prefix, sim_fastq);
    if (evaluate->parsed()) return run_evaluate(eval_contigs, eval_reference, eval_k, eval_stats);
    if (estimate->parsed()) return run_estimate(est_kmers, est_k, est_g, est_ptr);
    if (oracle->parsed())
      return run_oracle(oracle_inputs, oracle_output, oracle_k, oracle_min_len, oracle_stats,
                        oracle_dump);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
