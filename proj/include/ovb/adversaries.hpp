#pragma once

#include "ovb/core.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ovb {

enum class AdversaryKind {
  ObliviousBlock,
  AdaptiveOrthogonal,
  FixedSequence,
  IidSampler,
  EdgeStream
};

AdversaryKind adversary_kind_from_string(const std::string& name);
std::string to_string(AdversaryKind kind);

enum class IidKind { UniformSphere, SignedHypercube };

struct AdversaryParams {
  /// Logarithm base for the block length (oblivious-block), 2 or e.
  double log_base = 2.0;
  std::optional<std::vector<VecN>> sequence;          // fixed-sequence
  IidKind iid_kind = IidKind::UniformSphere;          // iid-sampler
  int vertices = 0;                                   // edge-stream
  std::optional<std::vector<std::pair<int, int>>> edges;  // edge-stream replay
};

/// Block length ceil(0.5 * log(T)) in the configured base.
int block_length(int horizon, double log_base = 2.0);

/// Input-sequence generator. Oblivious kinds pre-draw all randomness at
/// creation, so the emitted vectors cannot depend on the algorithm's signs;
/// the adaptive kind must be handed the algorithm's prefix each step.
class Adversary {
 public:
  Adversary(AdversaryKind kind, int n, int horizon, const AdversaryParams& params,
            RandomStream stream);

  /// Next input vector. algorithm_prefix must be supplied exactly for the
  /// adaptive-orthogonal kind.
  VecN next(const VecN* algorithm_prefix = nullptr);

  AdversaryKind kind() const { return kind_; }
  int dimension() const { return n_; }
  int horizon() const { return horizon_; }
  int emitted() const { return emitted_; }

  /// Pre-drawn block sign vectors (oblivious-block only).
  const std::vector<std::vector<int>>& block_signs() const { return block_signs_; }
  int block_len() const { return block_len_; }

 private:
  AdversaryKind kind_;
  int n_;
  int horizon_;
  int emitted_ = 0;

  // oblivious-block state
  int block_len_ = 0;
  std::vector<std::vector<int>> block_signs_;
  VecN block_partial_;

  std::vector<VecN> fixed_;                     // fixed-sequence / edge-stream
  IidKind iid_kind_ = IidKind::UniformSphere;   // iid-sampler
  RandomStream stream_;
};

/// Unit vector (e_u - e_v) / sqrt(2) on the given vertex count.
VecN edge_vector(int u, int v, int vertices);

}  // namespace ovb
