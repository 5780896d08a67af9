#include "unmt/corpus_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace unmt {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_lines(const std::string& path,
                 const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const std::string& l : lines) out << l << "\n";
  if (!out) throw std::runtime_error("write failed for " + path);
}

RawCorpus read_corpus(const std::string& path, const std::string& language) {
  RawCorpus c;
  c.language = language;
  c.lines = read_lines(path);
  return c;
}

void write_corpus(const RawCorpus& corpus, const std::string& path) {
  write_lines(path, corpus.lines);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed for " + path);
}

}  // namespace unmt
