#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ovb {

inline constexpr const char* kVersion = "0.1.0";

/// Dense real vector; all library math runs in 64-bit floats.
using VecN = Eigen::VectorXd;

/// Counter-based splittable random stream. The draw sequence is a pure
/// function of (master_seed, stream_id, draw index), so replicas replay
/// bit-for-bit and substreams with distinct ids do not overlap.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t master_seed, std::uint64_t stream_id = 0);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();
  /// Uniform draw in [0, 1).
  double next_unit();
  /// Standard normal draw (Box-Muller; the spare is cached).
  double next_gaussian();
  /// Fair coin in {-1, +1}.
  int next_sign();
  /// Uniform integer in [0, m), m >= 1. Rejection sampling, unbiased.
  std::uint64_t next_below(std::uint64_t m);

  /// Derived stream, independent for distinct k under the same parent.
  RandomStream substream(std::uint64_t k) const;

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// One standard Gaussian draw in dimension n.
VecN standard_gaussian_sample(RandomStream& stream, int n);

struct ScalarAtom {
  double value = 0.0;
  double probability = 0.0;
};

/// Finitely supported distribution on the real line. Construction rejects
/// non-finite atoms, negative weights, and weights that do not sum to 1
/// within 1e-12; nothing is silently renormalized.
class FiniteScalarDistribution {
 public:
  explicit FiniteScalarDistribution(std::vector<ScalarAtom> atoms);

  const std::vector<ScalarAtom>& atoms() const { return atoms_; }
  double max_abs_value() const;
  double mean() const;
  double total_probability() const;

  /// Uniform distribution over the given values.
  static FiniteScalarDistribution uniform(const std::vector<double>& values);
  static FiniteScalarDistribution point_mass(double value);

 private:
  std::vector<ScalarAtom> atoms_;
};

struct VectorAtom {
  VecN vector;
  double probability = 0.0;
};

/// Finitely supported distribution on R^n; same validation contract as the
/// scalar case, plus a common dimension across atoms.
class FiniteVectorDistribution {
 public:
  explicit FiniteVectorDistribution(std::vector<VectorAtom> atoms);

  const std::vector<VectorAtom>& atoms() const { return atoms_; }
  int dimension() const { return dimension_; }

  /// Marginal <X, w> as a scalar distribution.
  FiniteScalarDistribution project(const VecN& direction) const;

  static FiniteVectorDistribution uniform(const std::vector<VecN>& vectors);
  static FiniteVectorDistribution point_mass(const VecN& v);

 private:
  std::vector<VectorAtom> atoms_;
  int dimension_ = 0;
};

struct TranscriptStep {
  VecN input;
  int sign = 0;  // +1 or -1
  VecN prefix;   // signed prefix sum after this step
};

/// Time-ordered record of one signer run: input vector, emitted sign, and
/// the resulting prefix sum at every step.
struct Transcript {
  int dimension = 0;
  std::vector<TranscriptStep> steps;

  int horizon() const { return static_cast<int>(steps.size()); }

  /// Recompute prefixes from inputs and signs; true when every stored
  /// prefix matches within the relative tolerance.
  bool replay_consistent(double rel_tol = 1e-12) const;

  /// CSV with columns: step, v_1..v_n, sign, s_1..s_n. Leading '#' lines
  /// are treated as comments on read.
  void write_csv(std::ostream& out) const;
  static Transcript read_csv(std::istream& in);
};

/// Shortest decimal form that round-trips a double.
std::string format_double(double x);

}  // namespace ovb
