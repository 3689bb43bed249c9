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

#include <random>

#include "deltatree/metrics.hpp"
#include "oracles.hpp"

using namespace deltatree;

TEST(Levenshtein, KnownPairs) {
  EXPECT_EQ(levenshtein_distance("", ""), 0u);
  EXPECT_EQ(levenshtein_distance("", "ACGT"), 4u);
  EXPECT_EQ(levenshtein_distance("kitten", "sitting"), 3u);
  EXPECT_EQ(levenshtein_distance("flaw", "lawn"), 2u);
  EXPECT_EQ(levenshtein_distance("ACGT", "ACGT"), 0u);
}

TEST(Levenshtein, MatchesDynamicProgramming) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 1000; ++t) {
    // Lengths straddle the 64-bit block boundary of the bit-parallel kernel.
    const std::size_t la = std::uniform_int_distribution<std::size_t>(0, 200)(rng);
    const auto a = oracle::random_string(rng, la);
    const auto b = (t % 2) ? oracle::mutate(rng, a, la / 10 + 1, true) : oracle::random_string(rng, la / 2 + 3);
    ASSERT_EQ(levenshtein_distance(a, b), oracle::levenshtein(a, b)) << a << " / " << b;
    ASSERT_EQ(levenshtein_distance(b, a), oracle::levenshtein(a, b));
  }
}

TEST(Levenshtein, BlockEdges) {
  std::mt19937_64 rng(12);
  for (std::size_t len : {63u, 64u, 65u, 127u, 128u, 129u, 300u}) {
    const auto a = oracle::random_string(rng, len);
    const auto b = oracle::mutate(rng, a, 7, true);
    EXPECT_EQ(levenshtein_distance(a, b), oracle::levenshtein(a, b)) << len;
    EXPECT_EQ(levenshtein_distance(a, ""), len);
  }
}

TEST(Hamming, CountsMismatches) {
  EXPECT_EQ(hamming_distance("ACGT", "ACGA"), 1u);
  EXPECT_EQ(hamming_distance("", ""), 0u);
  EXPECT_THROW(hamming_distance("AC", "ACG"), InvalidInput);
}

TEST(Sets, JaccardAndDiceMatchSetArithmetic) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 1000; ++t) {
    const auto a = oracle::random_set(rng, 30, 60), b = oracle::random_set(rng, 30, 60);
    const auto [num, den] = oracle::jaccard_fraction(a, b);
    // A single correctly rounded division of exact integers.
    EXPECT_EQ(jaccard_distance(a, b), static_cast<double>(num) / static_cast<double>(den));
    EXPECT_NEAR(dice_distance(a, b), oracle::dice(a, b), 1e-15);
  }
  EXPECT_EQ(jaccard_distance({}, {}), 0.0);
  EXPECT_EQ(jaccard_distance(IntSet{1, 2, 3}, IntSet{}), 1.0);
  EXPECT_EQ(dice_distance(IntSet{1, 2}, IntSet{2, 3}), 0.5);
}

TEST(IndexDiffCodec, RoundTrips) {
  std::mt19937_64 rng(21);
  HammingMetric m;
  for (int t = 0; t < 1000; ++t) {
    const auto ref = oracle::random_string(rng, std::uniform_int_distribution<std::size_t>(0, 400)(rng));
    const auto target = oracle::mutate(rng, ref, ref.size() / 8, false);
    const Encoding e = encode(m, target, ref);
    ASSERT_EQ(e.kind, EncodingKind::IndexDiff);
    ASSERT_EQ(decode(m, e, ref), target);
    const auto diff = index_diff(target, ref);
    ASSERT_EQ(diff.size(), oracle::hamming(target, ref));
    ASSERT_EQ(apply_index_diff(diff, ref), target);
  }
}

TEST(EditTraceCodec, RoundTripsWithMinimalScript) {
  std::mt19937_64 rng(22);
  LevenshteinMetric m;
  for (int t = 0; t < 1000; ++t) {
    const auto ref = oracle::random_string(rng, std::uniform_int_distribution<std::size_t>(0, 300)(rng));
    const auto target = (t % 5 == 0) ? oracle::random_string(rng, ref.size() / 2) : oracle::mutate(rng, ref, 12, true);
    const auto edits = nw_edit_trace(target, ref);
    ASSERT_EQ(edits.size(), oracle::levenshtein(target, ref));
    ASSERT_EQ(apply_edits(edits, ref), target);
    ASSERT_EQ(decode(m, encode(m, target, ref), ref), target);
  }
}

TEST(SetDiffCodec, RoundTrips) {
  std::mt19937_64 rng(23);
  JaccardMetric m;
  for (int t = 0; t < 1000; ++t) {
    const auto ref = oracle::random_set(rng, 50, 1u << 20), target = oracle::random_set(rng, 50, 1u << 20);
    const SetDiff d = set_diff(target, ref);
    EXPECT_EQ(apply_set_diff(d, ref), target);
    EXPECT_EQ(decode(m, encode(m, target, ref), ref), target);
  }
}

TEST(SetDiffCodec, SizeGrowsWithSymmetricDifference) {
  JaccardMetric m;
  const IntSet ref{1, 2, 3, 4, 5, 6, 7, 8};
  EXPECT_LT(encoded_size(m, IntSet{1, 2, 3, 4, 5, 6, 7, 9}, ref), encoded_size(m, IntSet{1, 2, 10, 11, 12}, ref));
  EXPECT_EQ(encoded_size(m, ref, ref), 2u);  // two zero counts
}

TEST(Codecs, SizeFloorsAndBoundsHold) {
  std::mt19937_64 rng(24);
  HammingMetric h;
  LevenshteinMetric l;
  for (int t = 0; t < 500; ++t) {
    const auto ref = oracle::random_string(rng, std::uniform_int_distribution<std::size_t>(1, 600)(rng));
    const auto sub = oracle::mutate(rng, ref, rng() % 40, false);
    const double dh = double(oracle::hamming(sub, ref));
    const double sh = double(encoded_size(h, sub, ref));
    EXPECT_LE(h.size_floor()(dh), sh);
    EXPECT_GE(h.size_bound(sub, ref)(dh), sh);
    const auto ed = oracle::mutate(rng, ref, rng() % 40, true);
    const double dl = double(oracle::levenshtein(ed, ref));
    const double sl = double(encoded_size(l, ed, ref));
    EXPECT_LE(l.size_floor()(dl), sl);
    EXPECT_GE(l.size_bound(ed, ref)(dl), sl);
  }
}

TEST(Codecs, RejectTruncatedAndTrailingBytes) {
  HammingMetric h;
  const Sequence ref = "ACGTACGT", target = "ACCTACGA";
  Encoding e = encode(h, target, ref);
  Encoding cut = e;
  cut.bytes.pop_back();
  EXPECT_THROW(decode(h, cut, ref), DataError);
  Encoding extra = e;
  extra.bytes.push_back(0);
  EXPECT_THROW(decode(h, extra, ref), DataError);
}

TEST(Codecs, RejectOutOfRangeEdits) {
  Bytes out;
  append_index_diff(out, std::vector<IndexDiff>{{10, 'A'}});
  HammingMetric h;
  EXPECT_ANY_THROW(decode(h, Encoding{EncodingKind::IndexDiff, out}, Sequence("ACG")));
}

TEST(RawPayload, RoundTrips) {
  Bytes out;
  write_payload(out, Sequence("ACGT-."));
  write_payload(out, IntSet{0, 5, 1000000});
  ByteReader in(out);
  Sequence s;
  IntSet x;
  read_payload(in, s);
  read_payload(in, x);
  EXPECT_EQ(s, "ACGT-.");
  EXPECT_EQ(x, (IntSet{0, 5, 1000000}));
  EXPECT_TRUE(in.done());
}

TEST(Varint, RoundTripsAndSizes) {
  for (std::uint64_t v : {0ull, 1ull, 127ull, 128ull, 16383ull, 16384ull, ~0ull}) {
    Bytes b;
    put_varint(b, v);
    EXPECT_EQ(b.size(), varint_size(v));
    ByteReader in(b);
    EXPECT_EQ(in.varint(), v);
  }
}

// Dice violates the triangle inequality; its bounds must still contain every
// distance that can occur inside a ball.
TEST(DiceBounds, ContainTrueDistances) {
  std::mt19937_64 rng(31);
  DiceMetric m;
  for (int t = 0; t < 3000; ++t) {
    const auto q = oracle::random_set(rng, 12, 20), c = oracle::random_set(rng, 12, 20),
               x = oracle::random_set(rng, 12, 20);
    const double r = oracle::dice(c, x), dq = oracle::dice(q, c);
    const auto b = m.bounds(dq, r);
    const double d = oracle::dice(q, x);
    ASSERT_LE(b.lower, d + 1e-12);
    ASSERT_GE(b.upper, d - 1e-12);
  }
}

TEST(JaccardBounds, ContainTrueDistances) {
  std::mt19937_64 rng(32);
  JaccardMetric m;
  for (int t = 0; t < 3000; ++t) {
    const auto q = oracle::random_set(rng, 12, 20), c = oracle::random_set(rng, 12, 20),
               x = oracle::random_set(rng, 12, 20);
    const auto b = m.bounds(oracle::jaccard(q, c), oracle::jaccard(c, x));
    const double d = oracle::jaccard(q, x);
    ASSERT_LE(b.lower, d + 1e-12);
    ASSERT_GE(b.upper, d - 1e-12);
  }
}

TEST(Sets, RejectUnsortedInput) {
  JaccardMetric m;
  EXPECT_ANY_THROW(encode(m, IntSet{3, 1}, IntSet{1, 2}));
  EXPECT_FALSE(is_strictly_sorted(IntSet{1, 1}));
  EXPECT_TRUE(is_strictly_sorted(IntSet{}));
}
