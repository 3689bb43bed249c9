//
// Copyright (C) 2026 The deltatree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "deltatree/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace deltatree {

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

// Splits on '\n', dropping a trailing '\r'. A final empty line after the last
// newline is not reported.
template <class F>
void for_each_line(std::string_view text, F&& f) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    f(line, ++line_no);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\v' || c == '\f' || c == '\r'; }

}  // namespace

SequenceDataset parse_fasta(std::string_view text, bool msa, const LengthFilter& filter) {
  SequenceDataset all;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (!line.empty() && line.front() == '>') {
      all.records.push_back({all.records.size(), {}});
      all.headers.emplace_back(line.substr(1));
      return;
    }
    std::string_view body = line;
    while (!body.empty() && is_space(body.back())) body.remove_suffix(1);
    while (!body.empty() && is_space(body.front())) body.remove_prefix(1);
    if (body.empty()) return;
    if (all.records.empty()) {
      throw DataError("FASTA line " + std::to_string(line_no) + ": sequence data before the first '>' header");
    }
    if (std::any_of(body.begin(), body.end(), is_space)) {
      throw DataError("FASTA line " + std::to_string(line_no) + ": whitespace inside sequence");
    }
    all.records.back().payload.append(body);
  });

  if (msa && !all.records.empty()) {
    const std::size_t width = all.records.front().payload.size();
    for (std::size_t i = 0; i < all.records.size(); ++i) {
      if (all.records[i].payload.size() != width) {
        throw DataError("alignment record " + std::to_string(i) + " ('" + all.headers[i] + "') has length " +
                        std::to_string(all.records[i].payload.size()) + ", expected " + std::to_string(width));
      }
    }
  }

  if (!filter.min_length && !filter.max_length) return all;
  SequenceDataset kept;
  for (std::size_t i = 0; i < all.records.size(); ++i) {
    const std::size_t len = msa ? strip_gaps(all.records[i].payload).size() : all.records[i].payload.size();
    if (filter.accepts(len)) {
      kept.records.push_back(std::move(all.records[i]));
      kept.headers.push_back(std::move(all.headers[i]));
    }
  }
  return kept;
}

SequenceDataset read_fasta(const std::filesystem::path& path, bool msa, const LengthFilter& filter) {
  return parse_fasta(slurp(path), msa, filter);
}

void write_fasta(const std::filesystem::path& path, const SequenceDataset& data, std::size_t line_width) {
  std::string out;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    out += '>';
    out += i < data.headers.size() ? data.headers[i] : std::to_string(data.records[i].id);
    out += '\n';
    const auto& s = data.records[i].payload;
    for (std::size_t p = 0; p < s.size(); p += line_width) {
      out.append(s, p, line_width);
      out += '\n';
    }
  }
  spit(path, out);
}

Dataset<IntSet> parse_set_transactions(std::string_view text) {
  Dataset<IntSet> out;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    IntSet s;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && is_space(line[i])) ++i;
      if (i == line.size()) break;
      std::size_t j = i;
      while (j < line.size() && !is_space(line[j])) ++j;
      std::uint32_t v = 0;
      const auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + j, v);
      if (ec != std::errc{} || ptr != line.data() + j) {
        throw DataError("transaction line " + std::to_string(line_no) + ": '" + std::string(line.substr(i, j - i)) +
                        "' is not a non-negative 32-bit integer");
      }
      s.push_back(v);
      i = j;
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    out.push_back({out.size(), std::move(s)});
  });
  return out;
}

Dataset<IntSet> read_set_transactions(const std::filesystem::path& path) {
  return parse_set_transactions(slurp(path));
}

std::string format_set_transactions(const Dataset<IntSet>& data) {
  std::string out;
  for (const auto& r : data) {
    for (std::size_t i = 0; i < r.payload.size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(r.payload[i]);
    }
    out += '\n';
  }
  return out;
}

void write_set_transactions(const std::filesystem::path& path, const Dataset<IntSet>& data) {
  spit(path, format_set_transactions(data));
}

std::string strip_gaps(std::string_view sequence) {
  std::string out;
  out.reserve(sequence.size());
  for (const char c : sequence) {
    if (c != '-' && c != '.') out.push_back(c);
  }
  return out;
}

std::uint64_t raw_size(const Dataset<Sequence>& data) noexcept {
  std::uint64_t n = 0;
  for (const auto& r : data) n += r.payload.size();
  return n;
}

std::uint64_t raw_size(const Dataset<IntSet>& data) noexcept {
  std::uint64_t n = 0;
  for (const auto& r : data) {
    for (const std::uint32_t v : r.payload) {
      n += 1;  // separator or newline
      std::uint32_t x = v;
      do {
        ++n;
        x /= 10;
      } while (x);
    }
    if (r.payload.empty()) n += 1;
  }
  return n;
}

}  // namespace deltatree
