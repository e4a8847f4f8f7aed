#include "skga/io.hpp"

#include <cctype>
#include <cstdio>

namespace skga {

namespace {

void uppercase(std::string& s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
}

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

}  // namespace

FastxReader::FastxReader(std::vector<std::string> paths) : paths_(std::move(paths)) {
  if (paths_.empty()) throw ParseError("no input files given");
  reset();
}

void FastxReader::reset() {
  file_idx_ = 0;
  in_.close();
  in_.clear();
  have_pending_ = false;
  format_ = 0;
  if (!open_next_file()) {
    // all files empty: next() will return false
  }
}

void FastxReader::fail(const std::string& what) const {
  throw ParseError(paths_[file_idx_] + ":" + std::to_string(line_no_) + ": " + what);
}

bool FastxReader::open_next_file() {
  while (file_idx_ < paths_.size()) {
    const std::string& path = paths_[file_idx_];
    if (in_.is_open()) in_.close();
    in_.clear();
    in_.open(path);
    if (!in_) throw ParseError("cannot open " + path);
    line_no_ = 0;
    format_ = 0;
    have_pending_ = false;
    // find the first non-empty line to detect the format
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      strip_cr(line);
      if (line.empty()) continue;
      if (line[0] != '>' && line[0] != '@') fail("expected '>' or '@' record start");
      format_ = line[0];
      pending_ = std::move(line);
      have_pending_ = true;
      return true;
    }
    ++file_idx_;  // empty file, move on
  }
  return false;
}

bool FastxReader::next(std::string& seq) {
  while (true) {
    if (!have_pending_) {
      ++file_idx_;
      if (!open_next_file()) return false;
    }
    if (format_ == '>') {
      // pending_ holds the header
      seq.clear();
      std::string line;
      have_pending_ = false;
      while (std::getline(in_, line)) {
        ++line_no_;
        strip_cr(line);
        if (!line.empty() && line[0] == '>') {
          pending_ = std::move(line);
          have_pending_ = true;
          break;
        }
        if (!line.empty() && line[0] == '@') fail("FASTQ record inside FASTA file");
        seq += line;
      }
      uppercase(seq);
      return true;  // empty sequences are legal, callers skip reads < k
    }
    // FASTQ: pending_ holds "@name"
    std::string plus, qual;
    have_pending_ = false;
    if (!std::getline(in_, seq)) fail("truncated FASTQ record: missing sequence");
    ++line_no_;
    strip_cr(seq);
    if (!std::getline(in_, plus)) fail("truncated FASTQ record: missing '+' line");
    ++line_no_;
    strip_cr(plus);
    if (plus.empty() || plus[0] != '+') fail("malformed FASTQ record: expected '+' line");
    if (!std::getline(in_, qual)) fail("truncated FASTQ record: missing quality line");
    ++line_no_;
    strip_cr(qual);
    if (qual.size() != seq.size()) fail("FASTQ quality length differs from sequence length");
    // peek the next record header
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      strip_cr(line);
      if (line.empty()) continue;
      if (line[0] != '@') fail("expected '@' record start");
      pending_ = std::move(line);
      have_pending_ = true;
      break;
    }
    uppercase(seq);
    return true;
  }
}

std::vector<FastaRecord> read_fasta_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<FastaRecord> out;
  std::string line;
  uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    if (line[0] == '>') {
      out.push_back({line.substr(1), ""});
    } else {
      if (out.empty())
        throw ParseError(path + ":" + std::to_string(line_no) + ": sequence before first header");
      uppercase(line);
      out.back().seq += line;
    }
  }
  return out;
}

void write_fasta_record(std::ostream& out, const std::string& name,
                         std::string_view seq, size_t width) {
  out << '>' << name << '\n';
  for (size_t i = 0; i < seq.size(); i += width) {
    out << seq.substr(i, width) << '\n';
  }
  if (seq.empty()) out << '\n';
}

void write_contigs_fasta(std::ostream& out, std::span<const Contig> contigs) {
  char header[64];
  for (size_t i = 0; i < contigs.size(); ++i) {
    std::snprintf(header, sizeof(header), "contig_%zu len=%zu cov=%.1f", i,
                  contigs[i].seq.size(), contigs[i].mean_cov);
    write_fasta_record(out, header, contigs[i].seq);
  }
}

void write_contigs_fasta(const std::string& path, std::span<const Contig> contigs) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  write_contigs_fasta(out, contigs);
}

}  // namespace skga
