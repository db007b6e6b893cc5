#pragma once

#include "ovb/core.hpp"
#include "ovb/nets.hpp"
#include "ovb/tree.hpp"

#include <optional>
#include <string>

namespace ovb {

enum class SignerKind { UniformRandom, Greedy, SelfBalancingWalk, TreeCertified };

SignerKind signer_kind_from_string(const std::string& name);
std::string to_string(SignerKind kind);

struct SignerParams {
  /// Walk scale c > 0; required for the self-balancing walk.
  std::optional<double> walk_scale;
  /// Required for the tree-certified strategy.
  std::optional<CertifiedDistribution> certificate;
  std::optional<Net> net;
  std::optional<int> horizon;
};

/// Baseline walk scale: 10 sqrt(ln(2 n T)) when a horizon is known, else 10.
double default_walk_scale(int n, std::optional<int> horizon);

/// Online signing strategy: receives one vector at a time, emits an
/// irrevocable sign, and tracks its own prefix sum. Reads nothing beyond
/// its own state and the current vector.
class Signer {
 public:
  Signer(SignerKind kind, int n, const SignerParams& params, RandomStream stream);

  /// Emit the sign for v (norm <= 1) and fold it into the prefix.
  int step(const VecN& v);

  SignerKind kind() const { return kind_; }
  int dimension() const { return n_; }
  const VecN& prefix() const { return prefix_; }
  int steps_taken() const { return steps_; }
  /// Clone index sampled at creation (tree-certified only), 1-based.
  int clone_index() const { return clone_; }

 private:
  int certified_step(const VecN& v);

  SignerKind kind_;
  int n_;
  VecN prefix_;
  RandomStream stream_;
  int steps_ = 0;

  double walk_scale_ = 0.0;

  std::optional<CertifiedDistribution> certificate_;
  std::optional<Net> net_;
  int horizon_ = 0;
  int clone_ = 0;
  int position_ = 0;  // current node in the certified base tree
};

/// Drive a signer against a fixed input sequence, recording every step.
Transcript run_signer(Signer& signer, const std::vector<VecN>& inputs);

}  // namespace ovb
