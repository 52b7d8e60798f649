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

#ifndef FEDKAT_COMPRESSOR_HPP_
#define FEDKAT_COMPRESSOR_HPP_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fedkat/dataset.hpp"
#include "fedkat/rng.hpp"

namespace fedkat {

// An unbiased randomized compressor Q: E[Q(x)] = x and
// E|Q(x)|^2 <= omega |x|^2.  beta is the density coefficient: the expected
// payload of one compressed d-vector is d/beta scalars.
class Compressor {
 public:
  virtual ~Compressor() = default;

  // Draws a fresh compression of x.  Advances this compressor's stream.
  virtual Vector compress(const Vector& x) = 0;

  // Variance coefficient omega.  Throws for compressors that only satisfy a
  // correlated, family-level bound (PermK members).
  virtual double omega() const = 0;

  // Density coefficient beta (payload divisor).
  virtual double beta() const = 0;

  virtual std::string name() const = 0;
};

// Q(x) = x; omega = beta = 1.
class IdentityCompressor final : public Compressor {
 public:
  explicit IdentityCompressor(Index dim) : dim_(dim) {}
  Vector compress(const Vector& x) override;
  double omega() const override { return 1.0; }
  double beta() const override { return 1.0; }
  std::string name() const override { return "identity"; }

 private:
  Index dim_;
};

// Keeps k of d coordinates, chosen uniformly without replacement, scaled by
// d/k.  omega = beta = d/k; the second moment bound holds with equality.
class RandKCompressor final : public Compressor {
 public:
  RandKCompressor(Index dim, Index k, Rng stream);
  Vector compress(const Vector& x) override;
  double omega() const override {
    return static_cast<double>(dim_) / static_cast<double>(k_);
  }
  double beta() const override { return omega(); }
  std::string name() const override { return "randk"; }

 private:
  Index dim_;
  Index k_;
  Rng stream_;
  std::vector<Index> picked_;  // scratch for Floyd sampling
};

// Stochastic rounding of each coordinate to a signed power of two: |x| in
// [2^e, 2^(e+1)) rounds up with probability (|x| - 2^e) / 2^e, preserving
// the mean.  omega = 9/8.  The payload of one rounded coordinate is a sign
// and an exponent, so beta is a configuration choice; 64/9 treats it as
// 9 bits of a 64-bit word.
class NaturalDitheringCompressor final : public Compressor {
 public:
  NaturalDitheringCompressor(Index dim, Rng stream, double beta = 64.0 / 9.0);
  Vector compress(const Vector& x) override;
  double omega() const override { return 9.0 / 8.0; }
  double beta() const override { return beta_; }
  std::string name() const override { return "natural_dithering"; }

  // Exact second moment of one dithered scalar; the acceptance oracle for
  // the variance sweep integrates this in closed form.
  static double scalar_second_moment(double t);

 private:
  Index dim_;
  Rng stream_;
  double beta_;
};

// Shared state of one PermK round: a fresh uniform permutation of the d
// coordinates, cut into n contiguous blocks (sizes differ by at most one).
// All members of a round must observe the same permutation, so the family
// owns the stream and the solver refreshes it once per round.
class PermKFamily {
 public:
  PermKFamily(int n, Index dim, Rng stream);

  void fresh_round();
  std::span<const Index> block(int worker) const;
  int workers() const { return n_; }
  Index dim() const { return dim_; }
  long round() const { return round_; }

 private:
  int n_;
  Index dim_;
  Rng stream_;
  long round_ = 0;
  std::vector<Index> perm_;
  std::vector<std::size_t> offsets_;  // n + 1 cut points into perm_
};

// Worker i's view of the family: zero everywhere except its block of the
// current permutation, scaled by n.  Averaging all members reconstructs x
// exactly, so the family-level density coefficient is beta = n.  A member
// alone has no finite omega; omega() throws.
class PermKMemberCompressor final : public Compressor {
 public:
  PermKMemberCompressor(std::shared_ptr<PermKFamily> family, int worker);
  Vector compress(const Vector& x) override;
  double omega() const override;
  double beta() const override {
    return static_cast<double>(family_->workers());
  }
  std::string name() const override { return "permk"; }

 private:
  std::shared_ptr<PermKFamily> family_;
  int worker_;
};

// One compressor per worker plus, for PermK, the shared family that ties
// them together.  begin_round() is the per-round refresh hook.
struct WorkerCompressors {
  std::vector<std::unique_ptr<Compressor>> members;
  std::shared_ptr<PermKFamily> permk;  // null unless members are PermK

  void begin_round() {
    if (permk) permk->fresh_round();
  }
  int size() const { return static_cast<int>(members.size()); }
  // Payload divisor for one aggregate broadcast of this round.
  double aggregate_beta() const { return members.at(0)->beta(); }
};

}  // namespace fedkat

#endif  // FEDKAT_COMPRESSOR_HPP_
