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

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "deltatree/data_io.hpp"
#include "oracles.hpp"

using namespace deltatree;

TEST(Fasta, ParsesRecords) {
  const auto d = parse_fasta(">a first\nACGT\nAC\n>b\nTTT\n", false);
  ASSERT_EQ(d.records.size(), 2u);
  EXPECT_EQ(d.records[0], (Record<Sequence>{0, "ACGTAC"}));
  EXPECT_EQ(d.records[1], (Record<Sequence>{1, "TTT"}));
  EXPECT_EQ(d.headers[0], "a first");
  EXPECT_TRUE(parse_fasta("", false).records.empty());
}

TEST(Fasta, ValidatesAlignments) {
  EXPECT_NO_THROW(parse_fasta(">a\nAC-T\n>b\nA.GT\n", true));
  EXPECT_THROW(parse_fasta(">a\nAC-T\n>b\nAGT\n", true), DataError);
  EXPECT_THROW(parse_fasta("ACGT\n>a\nAC\n", false), DataError);
}

TEST(Fasta, LengthFilter) {
  const std::string text = ">a\n" + std::string(10, 'A') + "\n>b\n" + std::string(40, 'C') + "\n>c\n" +
                           std::string(2000, 'G') + "\n";
  const auto d = parse_fasta(text, false, LengthFilter::protein());
  ASSERT_EQ(d.records.size(), 1u);
  EXPECT_EQ(d.records[0].payload.size(), 40u);
}

TEST(Fasta, FileRoundTrip) {
  std::mt19937_64 rng(1);
  SequenceDataset d;
  for (std::size_t i = 0; i < 50; ++i) {
    d.records.push_back({i, oracle::random_string(rng, rng() % 300)});
    d.headers.push_back("seq" + std::to_string(i));
  }
  const auto path = std::filesystem::temp_directory_path() / "deltatree_io_test.fa";
  write_fasta(path, d, 60);
  const auto back = read_fasta(path, false);
  EXPECT_EQ(back.records, d.records);
  EXPECT_EQ(back.headers, d.headers);
  std::filesystem::remove(path);
  EXPECT_THROW(read_fasta("/nonexistent/x.fa", false), IoError);
}

TEST(Gaps, Stripping) {
  EXPECT_EQ(strip_gaps("A-C.G"), "ACG");
  EXPECT_EQ(strip_gaps("ACGT"), "ACGT");
  EXPECT_EQ(strip_gaps("--.."), "");
}

TEST(Sets, ParseSortsAndDeduplicates) {
  const auto d = parse_set_transactions("3 1 2\n\n5 5 4\n");
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[0].payload, (IntSet{1, 2, 3}));
  EXPECT_TRUE(d[1].payload.empty());
  EXPECT_EQ(d[2].payload, (IntSet{4, 5}));
  EXPECT_EQ(d[2].id, 2u);
  EXPECT_THROW(parse_set_transactions("1 x 2\n"), DataError);
  EXPECT_THROW(parse_set_transactions("1 -2\n"), DataError);
}

TEST(Sets, FileRoundTrip) {
  std::mt19937_64 rng(2);
  Dataset<IntSet> d;
  for (std::size_t i = 0; i < 100; ++i) d.push_back({i, oracle::random_set(rng, 20, 1000)});
  EXPECT_EQ(parse_set_transactions(format_set_transactions(d)), d);
  const auto path = std::filesystem::temp_directory_path() / "deltatree_io_test.txt";
  write_set_transactions(path, d);
  EXPECT_EQ(read_set_transactions(path), d);
  std::filesystem::remove(path);
}

TEST(RawSize, Conventions) {
  EXPECT_EQ(raw_size(Dataset<Sequence>{{0, "ACG"}, {1, "TT"}}), 5u);
  const Dataset<IntSet> sets{{0, {1, 22}}, {1, {}}};
  EXPECT_EQ(raw_size(sets), format_set_transactions(sets).size());
}

TEST(Holdout, DeterministicDisjointSplit) {
  Dataset<Sequence> d;
  for (std::size_t i = 0; i < 100; ++i) d.push_back({i, std::string(1 + i % 7, 'A')});
  const auto [train, queries] = split_holdout(d, 10, 5);
  EXPECT_EQ(train.size() + queries.size(), d.size());
  EXPECT_EQ(queries.size(), 10u);
  std::set<std::uint64_t> ids;
  for (const auto& r : train) ids.insert(r.id);
  for (const auto& r : queries) EXPECT_TRUE(ids.insert(r.id).second);
  EXPECT_EQ(split_holdout(d, 10, 5), split_holdout(d, 10, 5));
  const auto [all, none] = split_holdout(d, 0, 5);
  EXPECT_EQ(all, d);
  EXPECT_TRUE(none.empty());
  EXPECT_THROW(split_holdout(d, 100, 5), InvalidInput);
}
