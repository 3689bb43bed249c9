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

#include "deltatree/metrics.hpp"

#include <algorithm>
#include <limits>

namespace deltatree {

std::string_view to_string(EncodingKind kind) noexcept {
  switch (kind) {
    case EncodingKind::IndexDiff:
      return "index-diff";
    case EncodingKind::EditTrace:
      return "edit-trace";
    case EncodingKind::SetDiff:
      return "set-diff";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Hamming

std::size_t hamming_distance(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) {
    throw InvalidInput("hamming distance needs equal lengths (" + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()) + ")");
  }
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

// ---------------------------------------------------------------------------
// Levenshtein: Myers' bit-vector algorithm in Hyyrö's blocked form. The
// shorter string is the vertical pattern, split into 64-row blocks; each text
// character advances every block one column, carrying the horizontal delta of
// the block's bottom row into the next block.

namespace {

constexpr std::uint64_t kHighBit = std::uint64_t{1} << 63;

struct MyersScratch {
  std::vector<std::uint64_t> peq;  // 256 x blocks
  std::vector<std::uint64_t> pv, mv;
};

}  // namespace

std::size_t levenshtein_distance(std::string_view a, std::string_view b) {
  std::string_view pattern = a.size() <= b.size() ? a : b;
  std::string_view text = a.size() <= b.size() ? b : a;
  const std::size_t m = pattern.size();
  if (m == 0) return text.size();

  const std::size_t blocks = (m + 63) / 64;
  thread_local MyersScratch s;
  if (s.peq.size() < 256 * blocks) s.peq.assign(256 * blocks, 0);
  s.pv.assign(blocks, ~std::uint64_t{0});
  s.mv.assign(blocks, 0);

  for (std::size_t i = 0; i < m; ++i) {
    s.peq[static_cast<std::uint8_t>(pattern[i]) * blocks + i / 64] |= std::uint64_t{1} << (i % 64);
  }

  const std::uint64_t last_bit = std::uint64_t{1} << ((m - 1) % 64);
  std::size_t score = m;
  for (const char c : text) {
    const std::uint64_t* eq_row = &s.peq[static_cast<std::uint8_t>(c) * blocks];
    int hin = 1;
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::uint64_t pv = s.pv[b];
      const std::uint64_t mv = s.mv[b];
      const std::uint64_t hneg = hin < 0 ? 1 : 0;
      const std::uint64_t hpos = hin > 0 ? 1 : 0;
      std::uint64_t eq = eq_row[b];
      const std::uint64_t xv = eq | mv;
      eq |= hneg;
      const std::uint64_t xh = (((eq & pv) + pv) ^ pv) | eq;
      std::uint64_t ph = mv | ~(xh | pv);
      std::uint64_t mh = pv & xh;
      const std::uint64_t mask = b + 1 == blocks ? last_bit : kHighBit;
      const int hout = (ph & mask) ? 1 : ((mh & mask) ? -1 : 0);
      ph = (ph << 1) | hpos;
      mh = (mh << 1) | hneg;
      s.pv[b] = mh | ~(xv | ph);
      s.mv[b] = ph & xv;
      hin = hout;
    }
    score = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(score) + hin);
  }

  for (std::size_t i = 0; i < m; ++i) {
    s.peq[static_cast<std::uint8_t>(pattern[i]) * blocks + i / 64] = 0;
  }
  return score;
}

// ---------------------------------------------------------------------------
// Sets

bool is_strictly_sorted(std::span<const std::uint32_t> s) noexcept {
  return std::adjacent_find(s.begin(), s.end(), std::greater_equal<>{}) == s.end();
}

SetOverlap set_overlap(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) noexcept {
  SetOverlap o{0, a.size(), b.size()};
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++o.intersection;
      ++i;
      ++j;
    }
  }
  return o;
}

double jaccard_distance(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) noexcept {
  const SetOverlap o = set_overlap(a, b);
  const std::size_t uni = o.size_a + o.size_b - o.intersection;
  if (uni == 0) return 0.0;
  // A single rounding of the exact rational |a ^ b| / |a | b|.
  return static_cast<double>(uni - o.intersection) / static_cast<double>(uni);
}

double dice_distance(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) noexcept {
  const SetOverlap o = set_overlap(a, b);
  const std::size_t total = o.size_a + o.size_b;
  if (total == 0) return 0.0;
  return static_cast<double>(total - 2 * o.intersection) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Index diff

std::vector<IndexDiff> index_diff(std::string_view target, std::string_view reference) {
  if (target.size() != reference.size()) {
    throw InvalidInput("index-diff needs equal lengths (" + std::to_string(target.size()) + " vs " +
                       std::to_string(reference.size()) + ")");
  }
  std::vector<IndexDiff> diff;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] != reference[i]) diff.push_back({static_cast<std::uint32_t>(i), target[i]});
  }
  return diff;
}

Sequence apply_index_diff(std::span<const IndexDiff> diff, std::string_view reference) {
  Sequence out(reference);
  std::int64_t last = -1;
  for (const auto& d : diff) {
    if (static_cast<std::int64_t>(d.index) <= last || d.index >= out.size()) {
      throw DataError("index-diff positions out of order or out of range");
    }
    out[d.index] = d.ch;
    last = d.index;
  }
  return out;
}

void append_index_diff(Bytes& out, std::span<const IndexDiff> diff) {
  put_varint(out, diff.size());
  std::int64_t last = -1;
  for (const auto& d : diff) {
    if (static_cast<std::int64_t>(d.index) <= last) throw InvalidInput("index-diff positions must increase");
    put_varint(out, static_cast<std::uint64_t>(static_cast<std::int64_t>(d.index) - last - 1));
    out.push_back(static_cast<std::uint8_t>(d.ch));
    last = d.index;
  }
}

std::vector<IndexDiff> read_index_diff(ByteReader& in) {
  const std::uint64_t count = in.varint();
  if (count > in.remaining()) throw DataError("index-diff count exceeds available bytes");
  std::vector<IndexDiff> diff(count);
  std::uint64_t next = 0;
  for (auto& d : diff) {
    const std::uint64_t index = next + in.varint();
    if (index < next || index > std::numeric_limits<std::uint32_t>::max()) {
      throw DataError("index-diff position overflow");
    }
    d.index = static_cast<std::uint32_t>(index);
    d.ch = static_cast<char>(in.byte());
    next = index + 1;
  }
  return diff;
}

Encoding index_diff_encode(std::string_view target, std::string_view reference) {
  Encoding e{EncodingKind::IndexDiff, {}};
  append_index_diff(e.bytes, index_diff(target, reference));
  return e;
}

// ---------------------------------------------------------------------------
// Edit trace: banded global alignment with unit costs. The distance from the
// bit-parallel pass fixes the band: an optimal path never leaves |j - i| <= d.

std::vector<Edit> nw_edit_trace(std::string_view target, std::string_view reference) {
  const std::size_t d = levenshtein_distance(target, reference);
  if (d == 0) return {};

  const std::size_t m = target.size();
  const std::size_t n = reference.size();
  const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(d);
  const std::size_t width = 2 * d + 1;
  constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max() / 2;

  thread_local std::vector<std::uint32_t> band;
  band.assign((m + 1) * width, kInf);
  // Cell (i, j) lives at row i, column j - i + w.
  auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& {
    return band[i * width + static_cast<std::size_t>(static_cast<std::ptrdiff_t>(j) -
                                                      static_cast<std::ptrdiff_t>(i) + w)];
  };
  auto in_band = [&](std::size_t i, std::size_t j) {
    const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(i);
    return off >= -w && off <= w;
  };

  for (std::size_t i = 0; i <= m; ++i) {
    const std::size_t lo = static_cast<std::ptrdiff_t>(i) > w ? i - static_cast<std::size_t>(w) : 0;
    const std::size_t hi = std::min(n, i + static_cast<std::size_t>(w));
    for (std::size_t j = lo; j <= hi; ++j) {
      std::uint32_t v;
      if (i == 0) {
        v = static_cast<std::uint32_t>(j);
      } else if (j == 0) {
        v = static_cast<std::uint32_t>(i);
      } else {
        v = at(i - 1, j - 1) + (target[i - 1] != reference[j - 1] ? 1u : 0u);
        if (in_band(i - 1, j)) v = std::min(v, at(i - 1, j) + 1);
        if (in_band(i, j - 1)) v = std::min(v, at(i, j - 1) + 1);
      }
      at(i, j) = v;
    }
  }

  std::vector<Edit> edits;
  edits.reserve(d);
  std::size_t i = m, j = n;
  while (i > 0 || j > 0) {
    const std::uint32_t here = at(i, j);
    if (i > 0 && j > 0) {
      const bool mismatch = target[i - 1] != reference[j - 1];
      if (here == at(i - 1, j - 1) + (mismatch ? 1u : 0u)) {
        if (mismatch) edits.push_back({static_cast<std::uint32_t>(j - 1), EditOp::Sub, target[i - 1]});
        --i;
        --j;
        continue;
      }
    }
    if (j > 0 && in_band(i, j - 1) && here == at(i, j - 1) + 1) {
      edits.push_back({static_cast<std::uint32_t>(j - 1), EditOp::Del, 0});
      --j;
      continue;
    }
    edits.push_back({static_cast<std::uint32_t>(j), EditOp::Ins, target[i - 1]});
    --i;
  }
  std::reverse(edits.begin(), edits.end());
  return edits;
}

Sequence apply_edits(std::span<const Edit> edits, std::string_view reference) {
  Sequence out;
  out.reserve(reference.size() + edits.size());
  std::size_t cursor = 0;
  for (const auto& e : edits) {
    const std::size_t p = e.position;
    const bool consumes = e.op != EditOp::Ins;
    if (p < cursor || p > reference.size() || (consumes && p == reference.size())) {
      throw DataError("edit positions out of order or out of range");
    }
    out.append(reference.substr(cursor, p - cursor));
    cursor = p;
    switch (e.op) {
      case EditOp::Ins:
        out.push_back(e.ch);
        break;
      case EditOp::Sub:
        out.push_back(e.ch);
        cursor = p + 1;
        break;
      case EditOp::Del:
        cursor = p + 1;
        break;
    }
  }
  out.append(reference.substr(cursor));
  return out;
}

void append_edit_trace(Bytes& out, std::span<const Edit> edits) {
  put_varint(out, edits.size());
  std::uint32_t last = 0;
  for (const auto& e : edits) {
    if (e.position < last) throw InvalidInput("edit positions must not decrease");
    put_varint(out, (static_cast<std::uint64_t>(e.position - last) << 2) | static_cast<std::uint64_t>(e.op));
    if (e.op != EditOp::Del) out.push_back(static_cast<std::uint8_t>(e.ch));
    last = e.position;
  }
}

std::vector<Edit> read_edit_trace(ByteReader& in) {
  const std::uint64_t count = in.varint();
  if (count > in.remaining()) throw DataError("edit-trace count exceeds available bytes");
  std::vector<Edit> edits(count);
  std::uint64_t pos = 0;
  for (auto& e : edits) {
    const std::uint64_t word = in.varint();
    const std::uint64_t op = word & 3;
    if (op > 2) throw DataError("unknown edit opcode " + std::to_string(op));
    const std::uint64_t gap = word >> 2;
    if (gap > std::numeric_limits<std::uint32_t>::max() - pos) throw DataError("edit position overflow");
    pos += gap;
    e.position = static_cast<std::uint32_t>(pos);
    e.op = static_cast<EditOp>(op);
    if (e.op != EditOp::Del) e.ch = static_cast<char>(in.byte());
  }
  return edits;
}

Encoding edit_trace_encode(std::string_view target, std::string_view reference) {
  Encoding e{EncodingKind::EditTrace, {}};
  append_edit_trace(e.bytes, nw_edit_trace(target, reference));
  return e;
}

// ---------------------------------------------------------------------------
// Set diff

SetDiff set_diff(std::span<const std::uint32_t> target, std::span<const std::uint32_t> reference) {
  if (!is_strictly_sorted(target) || !is_strictly_sorted(reference)) {
    throw InvalidInput("sets must be strictly increasing");
  }
  SetDiff diff;
  std::set_difference(target.begin(), target.end(), reference.begin(), reference.end(),
                      std::back_inserter(diff.added));
  std::set_difference(reference.begin(), reference.end(), target.begin(), target.end(),
                      std::back_inserter(diff.removed));
  return diff;
}

IntSet apply_set_diff(const SetDiff& diff, std::span<const std::uint32_t> reference) {
  if (!is_strictly_sorted(diff.added) || !is_strictly_sorted(diff.removed)) {
    throw DataError("set-diff members are not strictly increasing");
  }
  if (!std::includes(reference.begin(), reference.end(), diff.removed.begin(), diff.removed.end())) {
    throw DataError("set-diff removes members absent from the reference");
  }
  IntSet kept;
  kept.reserve(reference.size());
  std::set_difference(reference.begin(), reference.end(), diff.removed.begin(), diff.removed.end(),
                      std::back_inserter(kept));
  if (set_overlap(kept, diff.added).intersection != 0) {
    throw DataError("set-diff adds members already in the reference");
  }
  IntSet out;
  out.reserve(kept.size() + diff.added.size());
  std::merge(kept.begin(), kept.end(), diff.added.begin(), diff.added.end(), std::back_inserter(out));
  return out;
}

namespace {

void append_sorted_members(Bytes& out, std::span<const std::uint32_t> members) {
  put_varint(out, members.size());
  std::uint32_t prev = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    put_varint(out, i == 0 ? members[i] : members[i] - prev);
    prev = members[i];
  }
}

IntSet read_sorted_members(ByteReader& in) {
  const std::uint64_t count = in.varint();
  if (count > in.remaining()) throw DataError("set member count exceeds available bytes");
  IntSet members(count);
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t delta = in.varint();
    if (i > 0 && delta == 0) throw DataError("set members are not strictly increasing");
    value = i == 0 ? delta : value + delta;
    if (value > std::numeric_limits<std::uint32_t>::max()) throw DataError("set member overflow");
    members[i] = static_cast<std::uint32_t>(value);
  }
  return members;
}

}  // namespace

void append_set_diff(Bytes& out, const SetDiff& diff) {
  append_sorted_members(out, diff.added);
  append_sorted_members(out, diff.removed);
}

SetDiff read_set_diff(ByteReader& in) {
  SetDiff diff;
  diff.added = read_sorted_members(in);
  diff.removed = read_sorted_members(in);
  return diff;
}

Encoding set_diff_encode(std::span<const std::uint32_t> target, std::span<const std::uint32_t> reference) {
  Encoding e{EncodingKind::SetDiff, {}};
  append_set_diff(e.bytes, set_diff(target, reference));
  return e;
}

// ---------------------------------------------------------------------------
// Raw payloads

void write_payload(Bytes& out, const Sequence& s) {
  put_varint(out, s.size());
  put_bytes(out, s);
}

void write_payload(Bytes& out, const IntSet& s) { append_sorted_members(out, s); }

void read_payload(ByteReader& in, Sequence& s) {
  const std::uint64_t len = in.varint();
  auto bytes = in.take(len);
  s.assign(bytes.begin(), bytes.end());
}

void read_payload(ByteReader& in, IntSet& s) { s = read_sorted_members(in); }

// ---------------------------------------------------------------------------
// Metric objects

void HammingMetric::encode_into(Bytes& out, const Sequence& target, const Sequence& reference) const {
  if (target.size() != reference.size()) {
    throw InvalidInput("index-diff needs equal lengths");
  }
  const std::size_t count_at = out.size();
  out.push_back(0);  // count placeholder, patched below
  std::size_t count = 0, next = 0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] != reference[i]) {
      put_varint(out, i - next);
      out.push_back(static_cast<std::uint8_t>(target[i]));
      next = i + 1;
      ++count;
    }
  }
  if (count < 0x80) {
    out[count_at] = static_cast<std::uint8_t>(count);
  } else {
    Bytes prefix;
    put_varint(prefix, count);
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(count_at));
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(count_at), prefix.begin(), prefix.end());
  }
}

Sequence HammingMetric::decode(ByteReader& in, const Sequence& reference) const {
  return apply_index_diff(read_index_diff(in), reference);
}

SizeBound HammingMetric::size_bound(const Sequence&, const Sequence& reference) const {
  const double width = static_cast<double>(varint_size(reference.size()));
  return {width + 1.0, width};
}

SizeBound HammingMetric::size_floor() const noexcept { return {2.0, 1.0}; }

void LevenshteinMetric::encode_into(Bytes& out, const Sequence& target, const Sequence& reference) const {
  append_edit_trace(out, nw_edit_trace(target, reference));
}

Sequence LevenshteinMetric::decode(ByteReader& in, const Sequence& reference) const {
  return apply_edits(read_edit_trace(in), reference);
}

SizeBound LevenshteinMetric::size_bound(const Sequence& target, const Sequence& reference) const {
  const double width = static_cast<double>(varint_size(std::uint64_t{reference.size()} << 2));
  return {width + 1.0, static_cast<double>(varint_size(std::max(target.size(), reference.size())))};
}

SizeBound LevenshteinMetric::size_floor() const noexcept { return {1.0, 1.0}; }

void JaccardMetric::encode_into(Bytes& out, const IntSet& target, const IntSet& reference) const {
  append_set_diff(out, set_diff(target, reference));
}

IntSet JaccardMetric::decode(ByteReader& in, const IntSet& reference) const {
  return apply_set_diff(read_set_diff(in), reference);
}

// |a ^ b| = jaccard * |a | b|; each member costs at most 5 varint bytes.
SizeBound JaccardMetric::size_bound(const IntSet& target, const IntSet& reference) const {
  const SetOverlap o = set_overlap(target, reference);
  const double uni = static_cast<double>(o.size_a + o.size_b - o.intersection);
  return {5.0 * uni, 2.0 * static_cast<double>(varint_size(o.size_a + o.size_b))};
}

DistanceBounds DiceMetric::bounds(double to_center, double radius) const noexcept {
  auto to_jaccard = [](double d) { return 2.0 * d / (1.0 + d); };
  auto from_jaccard = [](double j) { return j / (2.0 - j); };
  const double jq = to_jaccard(to_center);
  const double jr = to_jaccard(radius);
  return {from_jaccard(std::max(0.0, jq - jr)), from_jaccard(std::min(1.0, jq + jr))};
}

void DiceMetric::encode_into(Bytes& out, const IntSet& target, const IntSet& reference) const {
  append_set_diff(out, set_diff(target, reference));
}

IntSet DiceMetric::decode(ByteReader& in, const IntSet& reference) const {
  return apply_set_diff(read_set_diff(in), reference);
}

// |a ^ b| = dice * (|a| + |b|).
SizeBound DiceMetric::size_bound(const IntSet& target, const IntSet& reference) const {
  const double total = static_cast<double>(target.size() + reference.size());
  return {5.0 * total, 2.0 * static_cast<double>(varint_size(target.size() + reference.size()))};
}

}  // namespace deltatree
