#pragma once

#include "unmt/normalize.hpp"

#include <string>
#include <vector>

namespace unmt {

// UTF-8, LF line endings, one sentence per line.
std::vector<std::string> read_lines(const std::string& path);
void write_lines(const std::string& path, const std::vector<std::string>& lines);

RawCorpus read_corpus(const std::string& path, const std::string& language);
void write_corpus(const RawCorpus& corpus, const std::string& path);

// Atomic file replacement: write to <path>.tmp then rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace unmt
