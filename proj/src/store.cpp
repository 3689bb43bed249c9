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

#include "deltatree/store.hpp"

#include <fstream>
#include <sstream>

namespace deltatree {

void append_node_record(Bytes& out, const NodeRecord& r) {
  const std::size_t start = out.size();
  put_fixed(out, r.parent);
  put_fixed(out, r.right);
  put_fixed(out, r.center_blob_offset);
  put_fixed(out, r.member_blob_offset);
  put_fixed(out, r.offset);
  put_fixed(out, r.center_blob_size);
  put_fixed(out, r.member_blob_size);
  put_fixed(out, r.cardinality);
  put_fixed(out, r.center_rank);
  put_fixed(out, r.radius);
  put_fixed(out, r.aux_radius);
  put_fixed(out, r.lfd);
  put_fixed(out, r.depth);
  out.push_back(static_cast<std::uint8_t>(r.mode));
  out.insert(out.end(), 3, 0);
  if (out.size() - start != kNodeRecordSize) throw std::logic_error("node record size drifted");
}

NodeRecord parse_node_record(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  NodeRecord r;
  r.parent = in.fixed<std::uint64_t>();
  r.right = in.fixed<std::uint64_t>();
  r.center_blob_offset = in.fixed<std::uint64_t>();
  r.member_blob_offset = in.fixed<std::uint64_t>();
  r.offset = in.fixed<std::uint64_t>();
  r.center_blob_size = in.fixed<std::uint32_t>();
  r.member_blob_size = in.fixed<std::uint32_t>();
  r.cardinality = in.fixed<std::uint32_t>();
  r.center_rank = in.fixed<std::uint32_t>();
  r.radius = in.fixed<double>();
  r.aux_radius = in.fixed<double>();
  r.lfd = in.fixed<float>();
  r.depth = in.fixed<std::uint32_t>();
  const std::uint8_t mode = in.byte();
  if (mode > 1) throw DataError("unknown node mode " + std::to_string(mode));
  r.mode = static_cast<CompressionMode>(mode);
  return r;
}

Bytes serialize_header(IndexHeader& h, std::span<const std::uint8_t> root_payload) {
  if (h.metric.size() > 255) throw InvalidInput("metric name too long");
  Bytes out(kIndexMagic.begin(), kIndexMagic.end());
  put_fixed(out, kIndexVersion);
  out.push_back(static_cast<std::uint8_t>(h.metric.size()));
  put_bytes(out, h.metric);
  out.push_back(static_cast<std::uint8_t>(h.payload));
  out.push_back(h.flags);
  out.push_back(h.id_width);
  out.push_back(0);
  // Eight u64 fields follow, then the root payload.
  const std::uint64_t fixed_end = out.size() + 8 * 8;
  h.root_payload_offset = fixed_end;
  h.root_payload_size = root_payload.size();
  h.node_table_offset = fixed_end + root_payload.size();
  h.id_table_offset = h.node_table_offset + h.node_count * kNodeRecordSize;
  h.blob_offset = h.id_table_offset + h.point_count * h.id_width;
  for (const std::uint64_t v : {h.seed, h.point_count, h.node_count, h.node_table_offset, h.id_table_offset,
                                h.blob_offset, h.blob_size, h.root_payload_size}) {
    put_fixed(out, v);
  }
  out.insert(out.end(), root_payload.begin(), root_payload.end());
  return out;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

IndexFile IndexFile::open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  Bytes bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw IoError("read failed for " + path.string());
  return from_bytes(std::move(bytes));
}

IndexFile IndexFile::from_bytes(Bytes bytes) {
  IndexFile f;
  f.bytes_ = std::make_shared<const Bytes>(std::move(bytes));
  IndexHeader& h = f.header_;
  try {
    ByteReader in(*f.bytes_);
    auto magic = in.take(4);
    if (!std::equal(magic.begin(), magic.end(), kIndexMagic.begin())) throw IntegrityError("bad magic");
    const auto version = in.fixed<std::uint16_t>();
    if (version != kIndexVersion) throw IntegrityError("unsupported index version " + std::to_string(version));
    const std::uint8_t name_len = in.byte();
    auto name = in.take(name_len);
    h.metric.assign(name.begin(), name.end());
    const std::uint8_t payload = in.byte();
    if (payload > 1) throw IntegrityError("unknown payload kind");
    h.payload = static_cast<PayloadKind>(payload);
    h.flags = in.byte();
    h.id_width = in.byte();
    if (h.id_width != 4 && h.id_width != 8) throw IntegrityError("bad id width");
    in.byte();
    h.seed = in.fixed<std::uint64_t>();
    h.point_count = in.fixed<std::uint64_t>();
    h.node_count = in.fixed<std::uint64_t>();
    h.node_table_offset = in.fixed<std::uint64_t>();
    h.id_table_offset = in.fixed<std::uint64_t>();
    h.blob_offset = in.fixed<std::uint64_t>();
    h.blob_size = in.fixed<std::uint64_t>();
    h.root_payload_size = in.fixed<std::uint64_t>();
    h.root_payload_offset = in.position();
  } catch (const DataError& e) {
    throw IntegrityError(std::string("header: ") + e.what());
  }
  const std::uint64_t size = f.bytes_->size();
  const bool consistent =
      h.root_payload_offset + h.root_payload_size == h.node_table_offset &&
      h.node_count <= size / kNodeRecordSize &&
      h.node_table_offset + h.node_count * kNodeRecordSize == h.id_table_offset &&
      h.point_count <= size && h.id_table_offset + h.point_count * h.id_width == h.blob_offset &&
      h.blob_offset + h.blob_size == size && (h.node_count == 0) == (h.point_count == 0);
  if (!consistent) throw IntegrityError("section offsets do not match file size");
  return f;
}

IndexSizes IndexFile::sizes() const noexcept {
  const auto& h = header_;
  return IndexSizes{h.root_payload_offset, h.root_payload_size, h.node_count * kNodeRecordSize,
                    h.point_count * h.id_width, h.blob_size};
}

NodeRecord IndexFile::node(std::uint64_t i) const {
  if (i >= header_.node_count) throw IntegrityError("node index out of range", i);
  const auto* p = bytes_->data() + header_.node_table_offset + i * kNodeRecordSize;
  NodeRecord r;
  try {
    r = parse_node_record({p, kNodeRecordSize});
  } catch (const DataError& e) {
    throw IntegrityError(e.what(), i);
  }
  const bool sane = r.cardinality > 0 && r.center_rank < r.cardinality &&
                    r.offset + r.cardinality <= header_.point_count &&
                    (r.parent == kNoParent) == (i == 0) && (r.parent == kNoParent || r.parent < i) &&
                    (r.is_leaf() ? r.right == 0 : (r.right > i + 1 && r.right < header_.node_count));
  if (!sane) throw IntegrityError("inconsistent node record", i);
  return r;
}

std::uint64_t IndexFile::id_at(std::uint64_t pos) const {
  if (pos >= header_.point_count) throw IntegrityError("tree position out of range");
  const auto* p = bytes_->data() + header_.id_table_offset + pos * header_.id_width;
  if (header_.id_width == 4) {
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    return v;
  }
  std::uint64_t v;
  std::memcpy(&v, p, 8);
  return v;
}

std::span<const std::uint8_t> IndexFile::blob(std::uint64_t offset, std::uint64_t size, std::uint64_t node) const {
  if (offset > header_.blob_size || size > header_.blob_size - offset) {
    throw IntegrityError("blob range outside the blob section", node);
  }
  return {bytes_->data() + header_.blob_offset + offset, size};
}

std::span<const std::uint8_t> IndexFile::root_payload() const {
  return {bytes_->data() + header_.root_payload_offset, header_.root_payload_size};
}

}  // namespace deltatree
