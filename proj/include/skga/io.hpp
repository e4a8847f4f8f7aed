#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace skga {

struct Contig {
  std::string seq;
  double mean_cov = 0.0;  // mean coverage of the traversed graph nodes
};

struct FastaRecord {
  std::string name;
  std::string seq;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Re-iterable stream of read sequences. The assembly passes scan the input
// twice, so a source must survive reset().
class ReadSource {
 public:
  virtual ~ReadSource() = default;
  virtual void reset() = 0;
  // Fills seq (uppercased) and returns true, or returns false at end.
  virtual bool next(std::string& seq) = 0;
};

class VectorReads final : public ReadSource {
 public:
  VectorReads() = default;
  explicit VectorReads(std::vector<std::string> reads) : reads_(std::move(reads)) {}
  void reset() override { i_ = 0; }
  bool next(std::string& seq) override {
    if (i_ >= reads_.size()) return false;
    seq = reads_[i_++];
    return true;
  }

 private:
  std::vector<std::string> reads_;
  size_t i_ = 0;
};

// FASTA/FASTQ reader over one or more files. The format of each file is
// detected from its first record character: '>' FASTA (multi-line
// sequences), '@' FASTQ (strict 4-line records, qualities discarded).
// Sequences are uppercased. Malformed records raise ParseError with the
// file name and line number.
class FastxReader final : public ReadSource {
 public:
  explicit FastxReader(std::vector<std::string> paths);
  void reset() override;
  bool next(std::string& seq) override;

 private:
  bool open_next_file();
  [[noreturn]] void fail(const std::string& what) const;

  std::vector<std::string> paths_;
  size_t file_idx_ = 0;
  std::ifstream in_;
  std::string pending_;  // lookahead line (next FASTA header)
  bool have_pending_ = false;
  uint64_t line_no_ = 0;
  char format_ = 0;  // '>' or '@', 0 = not yet opened
};

std::vector<FastaRecord> read_fasta_records(const std::string& path);

void write_fasta_record(std::ostream& out, const std::string& name,
                         std::string_view seq, size_t width = 80);

// Contig FASTA: ">contig_<index> len=<bp> cov=<mean cov, 1 decimal>",
// 80-column wrapped, indices in the given (deterministic) order.
void write_contigs_fasta(std::ostream& out, std::span<const Contig> contigs);
void write_contigs_fasta(const std::string& path, std::span<const Contig> contigs);

}  // namespace skga
