// Copyright 2026 The fedkat Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "fedkat/compressor.hpp"

#include <cmath>
#include <memory>
#include <set>
#include <vector>

#include "doctest.h"
#include "fedkat/errors.hpp"
#include "fedkat/rng.hpp"
#include "testutil.hpp"

using fedkat::IdentityCompressor;
using fedkat::Index;
using fedkat::NaturalDitheringCompressor;
using fedkat::PermKFamily;
using fedkat::PermKMemberCompressor;
using fedkat::RandKCompressor;
using fedkat::Rng;
using fedkat::Vector;
using fedkat::testutil::random_vector;

namespace {

Vector iota_vector(Index d) {
  Vector v(d);
  for (Index i = 0; i < d; ++i) v[i] = static_cast<double>(i + 1);
  return v;
}

}  // namespace

TEST_CASE("identity compressor is lossless with unit coefficients") {
  IdentityCompressor id(4);
  const Vector x = iota_vector(4);
  const Vector q = id.compress(x);
  CHECK((q - x).norm() == 0.0);
  CHECK(id.omega() == 1.0);
  CHECK(id.beta() == 1.0);
  Vector bad(3);
  bad.setZero();
  CHECK_THROWS_AS(id.compress(bad), fedkat::Error);
}

TEST_CASE("randk keeps exactly k coordinates scaled by d/k") {
  RandKCompressor c(4, 2, Rng(7));
  const Vector x = iota_vector(4);  // (1, 2, 3, 4)
  for (int t = 0; t < 50; ++t) {
    const Vector q = c.compress(x);
    int nonzero = 0;
    for (Index i = 0; i < 4; ++i) {
      if (q[i] != 0.0) {
        ++nonzero;
        // Kept coordinates are scaled by d/k = 2: e.g. selection {0, 2}
        // sends (1, 2, 3, 4) to (2, 0, 6, 0).
        CHECK(q[i] == 2.0 * x[i]);
      }
    }
    CHECK(nonzero == 2);
  }
}

TEST_CASE("randk with k = d is the identity") {
  RandKCompressor c(5, 5, Rng(3));
  const Vector x = iota_vector(5);
  CHECK((c.compress(x) - x).norm() == 0.0);
  CHECK(c.omega() == 1.0);
}

TEST_CASE("randk variance coefficients") {
  CHECK(RandKCompressor(100, 1, Rng(1)).omega() == 100.0);
  CHECK(RandKCompressor(100, 1, Rng(1)).beta() == 100.0);
  CHECK(RandKCompressor(10, 10, Rng(1)).beta() == 1.0);
  CHECK_THROWS_AS(RandKCompressor(4, 0, Rng(1)), fedkat::Error);
  CHECK_THROWS_AS(RandKCompressor(4, 5, Rng(1)), fedkat::Error);
}

TEST_CASE("randk selects uniformly and unbiasedly") {
  const Index d = 10, k = 3;
  RandKCompressor c(d, k, Rng(0xabcdefull));
  Rng xs(0x12345ull);
  const Vector x = random_vector(d, xs);

  const long trials = 20000;
  Vector mean = Vector::Zero(d);
  Vector m2 = Vector::Zero(d);
  std::vector<long> hits(static_cast<std::size_t>(d), 0);
  for (long t = 0; t < trials; ++t) {
    const Vector q = c.compress(x);
    mean += q;
    m2 += q.cwiseProduct(q);
    for (Index i = 0; i < d; ++i) {
      if (q[i] != 0.0) ++hits[static_cast<std::size_t>(i)];
    }
  }
  mean /= static_cast<double>(trials);
  m2 /= static_cast<double>(trials);

  for (Index i = 0; i < d; ++i) {
    const double var = m2[i] - mean[i] * mean[i];
    const double se = std::sqrt(std::max(var, 1e-30) /
                                static_cast<double>(trials));
    CHECK(std::abs(mean[i] - x[i]) <= 3.0 * se + 1e-12);
    // Selection frequency k/d = 0.3 per coordinate.
    const double freq = static_cast<double>(hits[static_cast<std::size_t>(i)]) /
                        static_cast<double>(trials);
    CHECK(std::abs(freq - 0.3) <= 0.02);
  }
}

TEST_CASE("randk attains its second moment bound with equality") {
  const Index d = 10, k = 2;
  RandKCompressor c(d, k, Rng(0xfeedull));
  Rng xs(0x777ull);
  const Vector x = random_vector(d, xs);
  const long trials = 50000;
  double acc = 0.0;
  for (long t = 0; t < trials; ++t) acc += c.compress(x).squaredNorm();
  const double mean = acc / static_cast<double>(trials);
  const double exact = (static_cast<double>(d) / static_cast<double>(k)) *
                       x.squaredNorm();
  CHECK(std::abs(mean - exact) <= 0.02 * exact);
}

TEST_CASE("natural dithering rounds to bracketing powers of two") {
  NaturalDitheringCompressor c(3, Rng(0xd17ull));
  Vector x(3);
  x << 3.0, -0.3, 0.0;
  for (int t = 0; t < 200; ++t) {
    const Vector q = c.compress(x);
    // 3.0 in [2, 4): output is 2 or 4.
    CHECK((q[0] == 2.0 || q[0] == 4.0));
    // -0.3: |.| in [0.25, 0.5), sign preserved.
    CHECK((q[1] == -0.25 || q[1] == -0.5));
    // Zero maps to zero.
    CHECK(q[2] == 0.0);
  }
  CHECK(c.omega() == doctest::Approx(9.0 / 8.0));
  CHECK(c.beta() == doctest::Approx(64.0 / 9.0));
}

TEST_CASE("natural dithering preserves exact powers of two") {
  NaturalDitheringCompressor c(2, Rng(1));
  Vector x(2);
  x << 4.0, -0.125;
  for (int t = 0; t < 20; ++t) {
    const Vector q = c.compress(x);
    CHECK(q[0] == 4.0);
    CHECK(q[1] == -0.125);
  }
}

TEST_CASE("natural dithering is unbiased with the closed-form second moment") {
  const Index d = 6;
  NaturalDitheringCompressor c(d, Rng(0xabcull));
  Rng xs(0x31337ull);
  const Vector x = random_vector(d, xs, 3.0);

  const long trials = 100000;
  Vector mean = Vector::Zero(d);
  Vector m2 = Vector::Zero(d);
  Vector m4 = Vector::Zero(d);
  for (long t = 0; t < trials; ++t) {
    const Vector q = c.compress(x);
    mean += q;
    const Vector q2 = q.cwiseProduct(q);
    m2 += q2;
    m4 += q2.cwiseProduct(q2);
  }
  mean /= static_cast<double>(trials);
  m2 /= static_cast<double>(trials);
  m4 /= static_cast<double>(trials);

  for (Index i = 0; i < d; ++i) {
    const double m2_exact = NaturalDitheringCompressor::scalar_second_moment(
        x[i]);
    const double var = m2_exact - x[i] * x[i];
    const double se = std::sqrt(std::max(var, 1e-30) /
                                static_cast<double>(trials));
    CHECK(std::abs(mean[i] - x[i]) <= 3.0 * se + 1e-12);

    // Empirical second moment matches the closed form, and the closed form
    // respects the omega = 9/8 envelope.
    const double var_q2 = std::max(m4[i] - m2[i] * m2[i], 1e-30);
    const double se_q2 = std::sqrt(var_q2 / static_cast<double>(trials));
    CHECK(std::abs(m2[i] - m2_exact) <= 3.0 * se_q2 + 1e-12);
    CHECK(m2_exact <= (9.0 / 8.0) * x[i] * x[i] + 1e-15);
  }
}

TEST_CASE("scalar_second_moment closed form matches direct enumeration") {
  // For |t| in [2^e, 2^(e+1)): E Q^2 = p_hi (2^(e+1))^2 + (1-p_hi) (2^e)^2.
  for (const double t : {3.0, 0.3, -1.7, 5.9, 0.015625}) {
    const double mag = std::abs(t);
    int exp = 0;
    const double mant = std::frexp(mag, &exp);
    const double lo = std::ldexp(0.5, exp);
    const double p_hi = 2.0 * mant - 1.0;
    const double expect = p_hi * 4.0 * lo * lo + (1.0 - p_hi) * lo * lo;
    CHECK(NaturalDitheringCompressor::scalar_second_moment(t) ==
          doctest::Approx(expect).epsilon(1e-15));
  }
  CHECK(NaturalDitheringCompressor::scalar_second_moment(0.0) == 0.0);
}

TEST_CASE("permk blocks are a disjoint cover with scale n") {
  const int n = 2;
  const Index d = 4;
  auto family = std::make_shared<PermKFamily>(n, d, Rng(0x9e37ull));
  PermKMemberCompressor c0(family, 0);
  PermKMemberCompressor c1(family, 1);
  const Vector x = iota_vector(d);

  for (int round = 0; round < 20; ++round) {
    family->fresh_round();
    const Vector q0 = c0.compress(x);
    const Vector q1 = c1.compress(x);
    // Disjoint supports...
    for (Index i = 0; i < d; ++i) CHECK(q0[i] * q1[i] == 0.0);
    // ...that cover every coordinate: the average reconstructs x exactly.
    const Vector recon = (q0 + q1) / static_cast<double>(n);
    for (Index i = 0; i < d; ++i) CHECK(recon[i] == x[i]);
    // Nonzero coordinates carry scale n.
    for (Index i = 0; i < d; ++i) {
      if (q0[i] != 0.0) CHECK(q0[i] == 2.0 * x[i]);
    }
  }
}

TEST_CASE("permk member variance coefficient is family-level only") {
  auto family = std::make_shared<PermKFamily>(2, 4, Rng(1));
  PermKMemberCompressor c(family, 0);
  CHECK_THROWS_AS(c.omega(), fedkat::Error);
  CHECK(c.beta() == 2.0);
}

TEST_CASE("permk families with the same seed emit the same permutations") {
  PermKFamily a(3, 9, Rng(42));
  PermKFamily b(3, 9, Rng(42));
  for (int round = 0; round < 10; ++round) {
    a.fresh_round();
    b.fresh_round();
    CHECK(a.round() == b.round());
    for (int w = 0; w < 3; ++w) {
      const auto ba = a.block(w);
      const auto bb = b.block(w);
      REQUIRE(ba.size() == bb.size());
      for (std::size_t i = 0; i < ba.size(); ++i) CHECK(ba[i] == bb[i]);
    }
  }
}

TEST_CASE("permk with one worker is the identity") {
  auto family = std::make_shared<PermKFamily>(1, 5, Rng(5));
  PermKMemberCompressor c(family, 0);
  family->fresh_round();
  const Vector x = iota_vector(5);
  CHECK((c.compress(x) - x).norm() == 0.0);
}

TEST_CASE("permk block occupancy is uniform") {
  // d = 4, n = 2: each coordinate lands in worker 0's block half the time.
  const Index d = 4;
  PermKFamily family(2, d, Rng(0x0ccull));
  std::vector<long> hits(static_cast<std::size_t>(d), 0);
  const long rounds = 10000;
  for (long r = 0; r < rounds; ++r) {
    family.fresh_round();
    for (const Index c : family.block(0)) ++hits[static_cast<std::size_t>(c)];
  }
  for (Index i = 0; i < d; ++i) {
    const double freq = static_cast<double>(hits[static_cast<std::size_t>(i)]) /
                        static_cast<double>(rounds);
    CHECK(std::abs(freq - 0.5) <= 0.02);
  }
}

TEST_CASE("permk validates shapes") {
  CHECK_THROWS_AS(PermKFamily(5, 4, Rng(1)), fedkat::Error);  // n > d
  CHECK_THROWS_AS(PermKFamily(0, 4, Rng(1)), fedkat::Error);
  auto family = std::make_shared<PermKFamily>(2, 4, Rng(1));
  CHECK_THROWS_AS(PermKMemberCompressor(family, 2), fedkat::Error);
  CHECK_THROWS_AS(PermKMemberCompressor(nullptr, 0), fedkat::Error);
  PermKMemberCompressor ok(family, 0);
  Vector bad(3);
  bad.setZero();
  CHECK_THROWS_AS(ok.compress(bad), fedkat::Error);
}

TEST_CASE("permk uneven blocks differ in size by at most one") {
  PermKFamily family(3, 10, Rng(2));
  family.fresh_round();
  std::set<Index> seen;
  std::vector<std::size_t> sizes;
  for (int w = 0; w < 3; ++w) {
    const auto blk = family.block(w);
    sizes.push_back(blk.size());
    for (const Index c : blk) seen.insert(c);
  }
  CHECK(sizes == std::vector<std::size_t>{4, 3, 3});
  CHECK(seen.size() == 10);
}
