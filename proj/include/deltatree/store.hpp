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

// On-disk compressed index. See docs/format.md for the byte layout.

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "deltatree/compressor.hpp"
#include "deltatree/data_io.hpp"
#include "deltatree/errors.hpp"
#include "deltatree/metrics.hpp"
#include "deltatree/tree.hpp"
#include "deltatree/varint.hpp"

namespace deltatree {

inline constexpr std::array<char, 4> kIndexMagic{'P', 'C', 'K', 'S'};
inline constexpr std::uint16_t kIndexVersion = 1;
inline constexpr std::size_t kNodeRecordSize = 84;
inline constexpr std::uint64_t kNoParent = ~std::uint64_t{0};

inline constexpr std::uint8_t kFlagGapStrippedQueries = 0x01;

struct IndexHeader {
  std::string metric;
  PayloadKind payload = PayloadKind::Sequence;
  std::uint8_t flags = 0;
  std::uint8_t id_width = 4;
  std::uint64_t seed = 0;
  std::uint64_t point_count = 0;
  std::uint64_t node_count = 0;
  std::uint64_t node_table_offset = 0;
  std::uint64_t id_table_offset = 0;
  std::uint64_t blob_offset = 0;
  std::uint64_t blob_size = 0;
  std::uint64_t root_payload_offset = 0;
  std::uint64_t root_payload_size = 0;

  bool gap_stripped_queries() const noexcept { return flags & kFlagGapStrippedQueries; }
};

/// One fixed-width node-table entry. Nodes are in pre-order, so the left child
/// of an internal node i is i + 1 and every subtree is a contiguous run of
/// records and of blob bytes.
struct NodeRecord {
  std::uint64_t parent = kNoParent;
  std::uint64_t right = 0;  // 0 for leaves
  std::uint64_t center_blob_offset = 0;
  std::uint64_t member_blob_offset = 0;
  std::uint64_t offset = 0;  // first tree position
  std::uint32_t center_blob_size = 0;
  std::uint32_t member_blob_size = 0;
  std::uint32_t cardinality = 0;
  std::uint32_t center_rank = 0;  // center position relative to `offset`
  double radius = 0;
  double aux_radius = 0;  // edit-distance radius over gap-stripped members
  float lfd = 0;
  std::uint32_t depth = 0;
  CompressionMode mode = CompressionMode::UnitaryLeaf;

  bool is_leaf() const noexcept { return mode == CompressionMode::UnitaryLeaf; }
  std::uint64_t center_position() const noexcept { return offset + center_rank; }

  friend bool operator==(const NodeRecord&, const NodeRecord&) = default;
};

void append_node_record(Bytes& out, const NodeRecord& r);
NodeRecord parse_node_record(std::span<const std::uint8_t> bytes);

/// Split of the file into payload data and tree structure.
struct IndexSizes {
  std::uint64_t header = 0;  // excluding the root payload
  std::uint64_t root_payload = 0;
  std::uint64_t node_table = 0;
  std::uint64_t id_table = 0;
  std::uint64_t blob = 0;

  std::uint64_t data() const noexcept { return root_payload + blob; }
  std::uint64_t tree() const noexcept { return header + node_table + id_table; }
  std::uint64_t total() const noexcept { return data() + tree(); }
};

/// Untyped, validated view over an index file held in memory.
class IndexFile {
 public:
  static IndexFile open(const std::filesystem::path& path);
  static IndexFile from_bytes(Bytes bytes);

  const IndexHeader& header() const noexcept { return header_; }
  std::size_t file_size() const noexcept { return bytes_->size(); }
  IndexSizes sizes() const noexcept;

  NodeRecord node(std::uint64_t i) const;
  std::uint64_t id_at(std::uint64_t tree_position) const;
  std::span<const std::uint8_t> blob(std::uint64_t offset, std::uint64_t size, std::uint64_t node) const;
  std::span<const std::uint8_t> root_payload() const;

 private:
  IndexFile() = default;
  std::shared_ptr<const Bytes> bytes_;
  IndexHeader header_;
};

/// Serializes a header (everything up to the node table) given final section sizes.
Bytes serialize_header(IndexHeader& header, std::span<const std::uint8_t> root_payload);

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

struct WriteOptions {
  /// Store per-node edit-distance radii over gap-stripped sequences so that
  /// unaligned queries can be searched against an alignment built under Hamming.
  bool gap_stripped_queries = false;
};

namespace detail {

template <CompressiveMetric M>
double gap_stripped_radius(const Tree<M>& tree, const Cluster& c) {
  if constexpr (std::is_same_v<typename M::Point, Sequence>) {
    const Sequence center = strip_gaps(tree.payload(c.center));
    double r = 0;
    for (const std::size_t m : tree.members(c)) {
      r = std::max(r, static_cast<double>(levenshtein_distance(center, strip_gaps(tree.payload(m)))));
    }
    return r;
  } else {
    throw UnsupportedMetric("gap-stripped queries need sequence payloads");
  }
}

}  // namespace detail

/// Encodes a trimmed tree and its plan into index bytes.
template <CompressiveMetric M>
Bytes serialize_index(const Tree<M>& tree, const CompressionPlan& plan, const WriteOptions& options = {},
                      IndexSizes* sizes = nullptr) {
  if (plan.clusters.size() != tree.size()) throw InvalidInput("plan does not belong to this tree");
  const auto& data = tree.dataset();
  const M& metric = tree.metric();
  if (data.size() > std::numeric_limits<std::uint32_t>::max()) throw InvalidInput("too many points for one index");

  const auto nodes = tree.nodes();
  std::vector<std::uint64_t> parent(nodes.size(), kNoParent);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].is_leaf()) parent[nodes[i].left] = parent[nodes[i].right] = i;
  }

  Bytes blob;
  Bytes table;
  table.reserve(nodes.size() * kNodeRecordSize);
  const auto perm = tree.permutation();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Cluster& c = nodes[i];
    const bool leaf = c.is_leaf();
    const CompressionMode mode = leaf ? CompressionMode::UnitaryLeaf : CompressionMode::RecursiveInternal;
    if (plan.clusters[i].mode != mode) throw InvalidInput("plan mode disagrees with tree shape");

    NodeRecord r;
    r.parent = parent[i];
    r.right = leaf ? 0 : c.right;
    r.offset = c.offset;
    r.cardinality = static_cast<std::uint32_t>(c.cardinality);
    const auto members = tree.members(c);
    r.center_rank = static_cast<std::uint32_t>(std::find(members.begin(), members.end(), c.center) - members.begin());
    r.radius = c.radius;
    r.lfd = static_cast<float>(c.lfd);
    r.depth = static_cast<std::uint32_t>(c.depth);
    r.mode = mode;
    if (options.gap_stripped_queries) r.aux_radius = detail::gap_stripped_radius(tree, c);

    if (parent[i] != kNoParent) {
      r.center_blob_offset = blob.size();
      metric.encode_into(blob, tree.payload(c.center), tree.payload(nodes[parent[i]].center));
      r.center_blob_size = static_cast<std::uint32_t>(blob.size() - r.center_blob_offset);
    }
    if (leaf) {
      r.member_blob_offset = blob.size();
      const auto& center = tree.payload(c.center);
      for (std::size_t pos = c.offset; pos < c.offset + c.cardinality; ++pos) {
        if (perm[pos] != c.center) metric.encode_into(blob, tree.payload(perm[pos]), center);
      }
      r.member_blob_size = static_cast<std::uint32_t>(blob.size() - r.member_blob_offset);
    }
    append_node_record(table, r);
  }
  if (plan.unit == CostUnit::Bytes && static_cast<double>(blob.size()) != plan.total_cost()) {
    throw std::logic_error("encoded blob size differs from the plan's total cost");
  }

  IndexHeader h;
  h.metric = std::string(M::name);
  h.payload = M::payload;
  h.flags = options.gap_stripped_queries ? kFlagGapStrippedQueries : 0;
  std::uint64_t max_id = 0;
  for (const auto& rec : data) max_id = std::max(max_id, rec.id);
  h.id_width = max_id <= std::numeric_limits<std::uint32_t>::max() ? 4 : 8;
  h.seed = tree.seed();
  h.point_count = data.size();
  h.node_count = nodes.size();

  Bytes root;
  if (!nodes.empty()) write_payload(root, tree.payload(nodes[0].center));

  Bytes ids;
  ids.reserve(data.size() * h.id_width);
  for (const std::size_t idx : perm) {
    if (h.id_width == 4) {
      put_fixed(ids, static_cast<std::uint32_t>(data[idx].id));
    } else {
      put_fixed(ids, data[idx].id);
    }
  }

  h.blob_size = blob.size();
  Bytes out = serialize_header(h, root);
  const std::uint64_t header_only = out.size() - root.size();
  out.insert(out.end(), table.begin(), table.end());
  out.insert(out.end(), ids.begin(), ids.end());
  out.insert(out.end(), blob.begin(), blob.end());
  if (sizes) *sizes = IndexSizes{header_only, root.size(), table.size(), ids.size(), blob.size()};
  return out;
}

/// Writes the index to `path` and returns the number of bytes written.
template <CompressiveMetric M>
std::uint64_t write_index(const Tree<M>& tree, const CompressionPlan& plan, const std::filesystem::path& path,
                          const WriteOptions& options = {}) {
  const Bytes bytes = serialize_index(tree, plan, options);
  write_file(path, bytes);
  return bytes.size();
}

/// Typed view: checks that the file was built under metric M and decodes the
/// raw root center once.
template <CompressiveMetric M>
class CompressedIndex {
 public:
  using Point = typename M::Point;

  explicit CompressedIndex(IndexFile file, M metric = {}) : file_(std::move(file)), metric_(std::move(metric)) {
    const auto& h = file_.header();
    if (h.metric != M::name || h.payload != M::payload) {
      throw MetricMismatch("index was built under '" + h.metric + "', not '" + std::string(M::name) + "'");
    }
    if (h.node_count > 0) {
      ByteReader in(file_.root_payload());
      try {
        read_payload(in, root_center_);
      } catch (const DataError& e) {
        throw IntegrityError(std::string("root payload: ") + e.what(), 0);
      }
    }
  }

  const IndexFile& file() const noexcept { return file_; }
  const IndexHeader& header() const noexcept { return file_.header(); }
  const M& metric() const noexcept { return metric_; }
  std::size_t size() const noexcept { return file_.header().point_count; }
  std::size_t node_count() const noexcept { return file_.header().node_count; }
  NodeRecord node(std::uint64_t i) const { return file_.node(i); }
  const Point& root_center() const noexcept { return root_center_; }

 private:
  IndexFile file_;
  M metric_;
  Point root_center_{};
};

struct ByteRange {
  std::uint64_t offset = 0;
  std::uint64_t size = 0;
};

/// Per-search decompression state: memoized centers, the set of materialized
/// points and, optionally, a log of blob ranges read.
template <CompressiveMetric M>
class Session {
 public:
  using Point = typename M::Point;

  explicit Session(const CompressedIndex<M>& index, bool trace_reads = false)
      : index_(&index), materialized_(index.size(), false), trace_(trace_reads) {}

  const CompressedIndex<M>& index() const noexcept { return *index_; }

  /// Center payload of node i, decoding the chain of center encodings from the
  /// nearest memoized ancestor.
  const Point& center(std::uint64_t i) {
    if (auto it = centers_.find(i); it != centers_.end()) return it->second;
    std::vector<std::pair<std::uint64_t, NodeRecord>> chain;
    std::uint64_t at = i;
    while (true) {
      if (centers_.count(at)) break;
      NodeRecord r = index_->node(at);
      chain.emplace_back(at, r);
      if (r.parent == kNoParent) break;
      at = r.parent;
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      const auto& [node, rec] = *it;
      mark(rec.center_position());
      if (rec.parent == kNoParent) {
        centers_.emplace(node, index_->root_center());
        continue;
      }
      const Point& ref = centers_.at(rec.parent);
      auto bytes = blob(rec.center_blob_offset, rec.center_blob_size, node);
      centers_.emplace(node, decode_exact(bytes, ref, node));
    }
    return centers_.at(i);
  }

  /// Calls f(id, payload, is_center) for every member of leaf i, in tree order.
  template <class F>
  void scan_leaf(std::uint64_t i, F&& f) {
    const NodeRecord r = index_->node(i);
    if (!r.is_leaf()) throw InvalidInput("scan_leaf on an internal node");
    const Point& c = center(i);
    ByteReader in(blob(r.member_blob_offset, r.member_blob_size, i));
    const auto& file = index_->file();
    for (std::uint64_t k = 0; k < r.cardinality; ++k) {
      const std::uint64_t pos = r.offset + k;
      const std::uint64_t id = file.id_at(pos);
      if (k == r.center_rank) {
        f(id, c, true);
        continue;
      }
      Point p;
      try {
        p = index_->metric().decode(in, c);
      } catch (const DataError& e) {
        throw IntegrityError(std::string("member encoding: ") + e.what(), i);
      } catch (const InvalidInput& e) {
        throw IntegrityError(std::string("member encoding: ") + e.what(), i);
      }
      mark(pos);
      f(id, p, false);
    }
    if (!in.done()) throw IntegrityError("trailing bytes in member blob", i);
  }

  /// Every (id, payload) in the subtree rooted at node i.
  Dataset<Point> decompress(std::uint64_t i) {
    Dataset<Point> out;
    std::vector<std::uint64_t> stack{i};
    while (!stack.empty()) {
      const std::uint64_t n = stack.back();
      stack.pop_back();
      const NodeRecord r = index_->node(n);
      if (r.is_leaf()) {
        scan_leaf(n, [&](std::uint64_t id, const Point& p, bool) { out.push_back({id, p}); });
      } else {
        stack.push_back(r.right);
        stack.push_back(n + 1);
      }
    }
    return out;
  }

  std::size_t points_materialized() const noexcept { return materialized_count_; }
  const std::vector<ByteRange>& reads() const noexcept { return reads_; }

 private:
  void mark(std::uint64_t pos) {
    if (pos < materialized_.size() && !materialized_[pos]) {
      materialized_[pos] = true;
      ++materialized_count_;
    }
  }

  std::span<const std::uint8_t> blob(std::uint64_t offset, std::uint64_t size, std::uint64_t node) {
    if (trace_) reads_.push_back({offset, size});
    return index_->file().blob(offset, size, node);
  }

  Point decode_exact(std::span<const std::uint8_t> bytes, const Point& ref, std::uint64_t node) const {
    ByteReader in(bytes);
    try {
      Point p = index_->metric().decode(in, ref);
      if (!in.done()) throw IntegrityError("trailing bytes in center encoding", node);
      return p;
    } catch (const DataError& e) {
      throw IntegrityError(std::string("center encoding: ") + e.what(), node);
    } catch (const InvalidInput& e) {
      throw IntegrityError(std::string("center encoding: ") + e.what(), node);
    }
  }

  const CompressedIndex<M>* index_;
  std::unordered_map<std::uint64_t, Point> centers_;
  std::vector<bool> materialized_;
  std::size_t materialized_count_ = 0;
  bool trace_ = false;
  std::vector<ByteRange> reads_;
};

/// All points under node i, with original ids.
template <CompressiveMetric M>
Dataset<typename M::Point> decompress_cluster(const CompressedIndex<M>& index, std::uint64_t node) {
  Session<M> s(index);
  return s.decompress(node);
}

}  // namespace deltatree
