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

#pragma once

// Compressive metrics: a distance function paired with a lossless delta
// encoding whose size grows affinely with the distance.
//
//   metric        payload    encoding
//   hamming       Sequence   index-diff
//   levenshtein   Sequence   edit-trace (unit-cost Needleman-Wunsch)
//   jaccard       IntSet     set-diff
//   dice          IntSet     set-diff
//
// Byte layouts (little-endian, varint = unsigned LEB128):
//   index-diff  varint count, then count x (varint gap, u8 char); gap is the
//               number of unchanged positions since the previous change
//   edit-trace  varint count, then count x (varint (delta << 2 | opcode), [u8 char]);
//               delta is the reference position minus the previous edit's,
//               opcode 0 = Del (no char), 1 = Ins, 2 = Sub
//   set-diff    varint |added|, delta-varint members, varint |removed|, delta-varint members

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deltatree/errors.hpp"
#include "deltatree/varint.hpp"

namespace deltatree {

using Sequence = std::string;
using IntSet = std::vector<std::uint32_t>;

/// A dataset item: a stable identifier and its payload.
template <class P>
struct Record {
  std::uint64_t id = 0;
  P payload{};

  friend bool operator==(const Record&, const Record&) = default;
};

template <class P>
using Dataset = std::vector<Record<P>>;

enum class EncodingKind : std::uint8_t { IndexDiff = 0, EditTrace = 1, SetDiff = 2 };

std::string_view to_string(EncodingKind kind) noexcept;

struct Encoding {
  EncodingKind kind = EncodingKind::IndexDiff;
  Bytes bytes;
};

/// `per_unit * distance + overhead`: an upper bound on an encoding's size in
/// bytes (size_bound), or a lower bound (size_floor).
struct SizeBound {
  double per_unit = 0;
  double overhead = 0;
  double operator()(double distance) const noexcept { return per_unit * distance + overhead; }
};

// ---------------------------------------------------------------------------
// Distances

/// Number of differing positions. Throws InvalidInput on a length mismatch.
std::size_t hamming_distance(std::string_view a, std::string_view b);

/// Unit-cost edit distance (bit-parallel, any length).
std::size_t levenshtein_distance(std::string_view a, std::string_view b);

struct SetOverlap {
  std::size_t intersection = 0;
  std::size_t size_a = 0;
  std::size_t size_b = 0;
};

/// Both inputs must be strictly increasing.
SetOverlap set_overlap(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) noexcept;

/// 1 - |a & b| / |a | b|, and 0 for two empty sets.
double jaccard_distance(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) noexcept;

/// 1 - 2|a & b| / (|a| + |b|), and 0 for two empty sets.
double dice_distance(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) noexcept;

bool is_strictly_sorted(std::span<const std::uint32_t> s) noexcept;

// ---------------------------------------------------------------------------
// Structured encodings

struct IndexDiff {
  std::uint32_t index = 0;
  char ch = 0;
  friend bool operator==(const IndexDiff&, const IndexDiff&) = default;
};

enum class EditOp : std::uint8_t { Del = 0, Ins = 1, Sub = 2 };

/// One edit in reference coordinates. Ins places `ch` before reference[position].
struct Edit {
  std::uint32_t position = 0;
  EditOp op = EditOp::Sub;
  char ch = 0;
  friend bool operator==(const Edit&, const Edit&) = default;
};

struct SetDiff {
  IntSet added;    // target \ reference
  IntSet removed;  // reference \ target
  friend bool operator==(const SetDiff&, const SetDiff&) = default;
};

std::vector<IndexDiff> index_diff(std::string_view target, std::string_view reference);
Sequence apply_index_diff(std::span<const IndexDiff> diff, std::string_view reference);

/// Minimal edit script turning `reference` into `target`; its length equals
/// levenshtein_distance(target, reference). Edits are ordered by reference
/// position, insertions before the substitution or deletion at the same position.
std::vector<Edit> nw_edit_trace(std::string_view target, std::string_view reference);
Sequence apply_edits(std::span<const Edit> edits, std::string_view reference);

SetDiff set_diff(std::span<const std::uint32_t> target, std::span<const std::uint32_t> reference);
IntSet apply_set_diff(const SetDiff& diff, std::span<const std::uint32_t> reference);

// Byte-level codecs. The append_* functions write the layouts documented above;
// the read_* functions consume exactly one encoding and throw DataError on
// malformed or inconsistent bytes.
void append_index_diff(Bytes& out, std::span<const IndexDiff> diff);
std::vector<IndexDiff> read_index_diff(ByteReader& in);
void append_edit_trace(Bytes& out, std::span<const Edit> edits);
std::vector<Edit> read_edit_trace(ByteReader& in);
void append_set_diff(Bytes& out, const SetDiff& diff);
SetDiff read_set_diff(ByteReader& in);

Encoding index_diff_encode(std::string_view target, std::string_view reference);
Encoding edit_trace_encode(std::string_view target, std::string_view reference);
Encoding set_diff_encode(std::span<const std::uint32_t> target, std::span<const std::uint32_t> reference);

// Raw (reference-free) payload serialization, used for the root center.
void write_payload(Bytes& out, const Sequence& s);
void write_payload(Bytes& out, const IntSet& s);
void read_payload(ByteReader& in, Sequence& s);
void read_payload(ByteReader& in, IntSet& s);

// ---------------------------------------------------------------------------
// Metric objects

/// Lower and upper bounds on d(q, x) for every x in a ball of radius `radius`
/// around a center at distance `to_center` from q.
struct DistanceBounds {
  double lower = 0;
  double upper = 0;
};

inline DistanceBounds triangle_bounds(double to_center, double radius) noexcept {
  return {std::max(0.0, to_center - radius), to_center + radius};
}

enum class PayloadKind : std::uint8_t { Sequence = 0, Set = 1 };

struct HammingMetric {
  using Point = Sequence;
  static constexpr std::string_view name = "hamming";
  static constexpr EncodingKind encoding = EncodingKind::IndexDiff;
  static constexpr PayloadKind payload = PayloadKind::Sequence;
  static constexpr bool supports_radius_growth = true;

  double distance(const Sequence& a, const Sequence& b) const {
    return static_cast<double>(hamming_distance(a, b));
  }
  DistanceBounds bounds(double to_center, double radius) const noexcept {
    return triangle_bounds(to_center, radius);
  }
  void encode_into(Bytes& out, const Sequence& target, const Sequence& reference) const;
  Sequence decode(ByteReader& in, const Sequence& reference) const;
  SizeBound size_bound(const Sequence& target, const Sequence& reference) const;
  SizeBound size_floor() const noexcept;
};

struct LevenshteinMetric {
  using Point = Sequence;
  static constexpr std::string_view name = "levenshtein";
  static constexpr EncodingKind encoding = EncodingKind::EditTrace;
  static constexpr PayloadKind payload = PayloadKind::Sequence;
  static constexpr bool supports_radius_growth = true;

  double distance(const Sequence& a, const Sequence& b) const {
    return static_cast<double>(levenshtein_distance(a, b));
  }
  DistanceBounds bounds(double to_center, double radius) const noexcept {
    return triangle_bounds(to_center, radius);
  }
  void encode_into(Bytes& out, const Sequence& target, const Sequence& reference) const;
  Sequence decode(ByteReader& in, const Sequence& reference) const;
  SizeBound size_bound(const Sequence& target, const Sequence& reference) const;
  SizeBound size_floor() const noexcept;
};

struct JaccardMetric {
  using Point = IntSet;
  static constexpr std::string_view name = "jaccard";
  static constexpr EncodingKind encoding = EncodingKind::SetDiff;
  static constexpr PayloadKind payload = PayloadKind::Set;
  static constexpr bool supports_radius_growth = false;

  double distance(const IntSet& a, const IntSet& b) const { return jaccard_distance(a, b); }
  DistanceBounds bounds(double to_center, double radius) const noexcept {
    return triangle_bounds(to_center, radius);
  }
  void encode_into(Bytes& out, const IntSet& target, const IntSet& reference) const;
  IntSet decode(ByteReader& in, const IntSet& reference) const;
  SizeBound size_bound(const IntSet& target, const IntSet& reference) const;
};

/// Dice is not a metric, but it is a monotone function of Jaccard
/// (J = 2D / (1 + D)), so ball bounds are taken in Jaccard space and mapped back.
struct DiceMetric {
  using Point = IntSet;
  static constexpr std::string_view name = "dice";
  static constexpr EncodingKind encoding = EncodingKind::SetDiff;
  static constexpr PayloadKind payload = PayloadKind::Set;
  static constexpr bool supports_radius_growth = false;

  double distance(const IntSet& a, const IntSet& b) const { return dice_distance(a, b); }
  DistanceBounds bounds(double to_center, double radius) const noexcept;
  void encode_into(Bytes& out, const IntSet& target, const IntSet& reference) const;
  IntSet decode(ByteReader& in, const IntSet& reference) const;
  SizeBound size_bound(const IntSet& target, const IntSet& reference) const;
};

/// Euclidean distance on fixed-dimension real vectors. Has no codec; used for
/// geometric experiments on the tree and the cost model.
template <std::size_t D>
struct EuclideanMetric {
  using Point = std::array<double, D>;
  static constexpr std::string_view name = "euclidean";

  double distance(const Point& a, const Point& b) const noexcept {
    double s = 0;
    for (std::size_t i = 0; i < D; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  }
  DistanceBounds bounds(double to_center, double radius) const noexcept {
    return triangle_bounds(to_center, radius);
  }
};

template <class M>
concept Metric = requires(const M& m, const typename M::Point& p) {
  { m.distance(p, p) } -> std::convertible_to<double>;
  { m.bounds(0.0, 0.0) } -> std::same_as<DistanceBounds>;
};

template <class M>
concept CompressiveMetric = Metric<M> && requires(const M& m, const typename M::Point& p, Bytes& out,
                                                  ByteReader& in) {
  { M::name } -> std::convertible_to<std::string_view>;
  { M::encoding } -> std::convertible_to<EncodingKind>;
  m.encode_into(out, p, p);
  { m.decode(in, p) } -> std::same_as<typename M::Point>;
  { m.size_bound(p, p) } -> std::same_as<SizeBound>;
};

template <CompressiveMetric M>
Encoding encode(const M& metric, const typename M::Point& target, const typename M::Point& reference) {
  Encoding e{M::encoding, {}};
  metric.encode_into(e.bytes, target, reference);
  return e;
}

/// Decodes one encoding; throws DataError when bytes are left over.
template <CompressiveMetric M>
typename M::Point decode(const M& metric, const Encoding& e, const typename M::Point& reference) {
  if (e.kind != M::encoding) throw DataError("encoding kind does not match metric");
  ByteReader in(e.bytes);
  auto p = metric.decode(in, reference);
  if (!in.done()) throw DataError("trailing bytes after encoding");
  return p;
}

/// Size in bytes of encode(target, reference) without keeping the bytes.
template <CompressiveMetric M>
std::size_t encoded_size(const M& metric, const typename M::Point& target,
                         const typename M::Point& reference) {
  thread_local Bytes scratch;
  scratch.clear();
  metric.encode_into(scratch, target, reference);
  return scratch.size();
}

}  // namespace deltatree
