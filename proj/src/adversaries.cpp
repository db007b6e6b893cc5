#include "ovb/adversaries.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ovb {

AdversaryKind adversary_kind_from_string(const std::string& name) {
  if (name == "oblivious-block") return AdversaryKind::ObliviousBlock;
  if (name == "adaptive-orthogonal") return AdversaryKind::AdaptiveOrthogonal;
  if (name == "fixed-sequence") return AdversaryKind::FixedSequence;
  if (name == "iid-sampler") return AdversaryKind::IidSampler;
  if (name == "edge-stream") return AdversaryKind::EdgeStream;
  throw std::invalid_argument("unknown adversary kind: " + name);
}

std::string to_string(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::ObliviousBlock: return "oblivious-block";
    case AdversaryKind::AdaptiveOrthogonal: return "adaptive-orthogonal";
    case AdversaryKind::FixedSequence: return "fixed-sequence";
    case AdversaryKind::IidSampler: return "iid-sampler";
    case AdversaryKind::EdgeStream: return "edge-stream";
  }
  return "?";
}

int block_length(int horizon, double log_base) {
  if (horizon < 2) return 1;
  return static_cast<int>(std::ceil(0.5 * std::log(static_cast<double>(horizon)) /
                                    std::log(log_base)));
}

namespace {

// +90 degree rotation in the first two coordinates.
VecN rotate_quarter(const VecN& v) {
  VecN out = v;
  out[0] = -v[1];
  out[1] = v[0];
  return out;
}

VecN basis_vector(int n, int i) {
  VecN v = VecN::Zero(n);
  v[i] = 1.0;
  return v;
}

}  // namespace

VecN edge_vector(int u, int v, int vertices) {
  if (u < 0 || v < 0 || u >= vertices || v >= vertices || u == v)
    throw std::invalid_argument("edge_vector: bad endpoints");
  VecN out = VecN::Zero(vertices);
  out[u] = 1.0 / std::numbers::sqrt2;
  out[v] = -1.0 / std::numbers::sqrt2;
  return out;
}

Adversary::Adversary(AdversaryKind kind, int n, int horizon, const AdversaryParams& params,
                     RandomStream stream)
    : kind_(kind), n_(n), horizon_(horizon), stream_(stream) {
  if (n < 1) throw std::invalid_argument("adversary: dimension must be >= 1");
  if (horizon < 1) throw std::invalid_argument("adversary: horizon must be >= 1");

  switch (kind_) {
    case AdversaryKind::ObliviousBlock: {
      if (n_ < 2)
        throw std::invalid_argument("oblivious-block: needs dimension >= 2");
      block_len_ = block_length(horizon_, params.log_base);
      // All randomness drawn now: the emitted sequence is a pure function of
      // the seed, whatever signs the algorithm plays.
      const int blocks = (horizon_ + block_len_ - 1) / block_len_;
      block_signs_.resize(static_cast<std::size_t>(blocks));
      for (auto& y : block_signs_) {
        y.resize(static_cast<std::size_t>(block_len_));
        for (auto& s : y) s = stream_.next_sign();
      }
      block_partial_ = VecN::Zero(n_);
      break;
    }
    case AdversaryKind::AdaptiveOrthogonal:
      if (n_ < 2)
        throw std::invalid_argument("adaptive-orthogonal: needs dimension >= 2");
      break;
    case AdversaryKind::FixedSequence: {
      if (!params.sequence.has_value())
        throw std::invalid_argument("fixed-sequence: no sequence supplied");
      fixed_ = *params.sequence;
      if (static_cast<int>(fixed_.size()) < horizon_)
        throw std::invalid_argument("fixed-sequence: sequence shorter than horizon");
      for (const auto& v : fixed_)
        if (v.size() != n_) throw std::invalid_argument("fixed-sequence: dimension mismatch");
      break;
    }
    case AdversaryKind::IidSampler:
      iid_kind_ = params.iid_kind;
      break;
    case AdversaryKind::EdgeStream: {
      const int vertices = params.vertices > 0 ? params.vertices : n_;
      if (vertices != n_)
        throw std::invalid_argument("edge-stream: dimension must equal vertex count");
      if (vertices < 2) throw std::invalid_argument("edge-stream: needs >= 2 vertices");
      fixed_.reserve(static_cast<std::size_t>(horizon_));
      if (params.edges.has_value()) {
        if (static_cast<int>(params.edges->size()) < horizon_)
          throw std::invalid_argument("edge-stream: edge list shorter than horizon");
        for (int t = 0; t < horizon_; ++t) {
          const auto& [u, v] = (*params.edges)[static_cast<std::size_t>(t)];
          fixed_.push_back(edge_vector(u, v, vertices));
        }
      } else {
        for (int t = 0; t < horizon_; ++t) {
          const int u = static_cast<int>(stream_.next_below(static_cast<std::uint64_t>(vertices)));
          int v = static_cast<int>(stream_.next_below(static_cast<std::uint64_t>(vertices - 1)));
          if (v >= u) ++v;
          fixed_.push_back(edge_vector(u, v, vertices));
        }
      }
      break;
    }
  }
}

VecN Adversary::next(const VecN* algorithm_prefix) {
  if (emitted_ >= horizon_) throw std::runtime_error("adversary: horizon exhausted");
  if ((kind_ == AdversaryKind::AdaptiveOrthogonal) != (algorithm_prefix != nullptr))
    throw std::invalid_argument(
        "adversary: algorithm prefix must be supplied exactly for adaptive-orthogonal");

  VecN out;
  switch (kind_) {
    case AdversaryKind::ObliviousBlock: {
      const int in_block = emitted_ % block_len_;
      const int block = emitted_ / block_len_;
      if (in_block == 0) {
        block_partial_ = VecN::Zero(n_);
        out = basis_vector(n_, 0);
      } else {
        out = rotate_quarter(block_partial_ / block_partial_.norm());
      }
      block_partial_ +=
          static_cast<double>(
              block_signs_[static_cast<std::size_t>(block)][static_cast<std::size_t>(in_block)]) *
          out;
      break;
    }
    case AdversaryKind::AdaptiveOrthogonal: {
      if (algorithm_prefix->size() != n_)
        throw std::invalid_argument("adversary: prefix dimension mismatch");
      const double norm = algorithm_prefix->norm();
      out = norm == 0.0 ? basis_vector(n_, 0) : rotate_quarter(*algorithm_prefix / norm);
      break;
    }
    case AdversaryKind::FixedSequence:
    case AdversaryKind::EdgeStream:
      out = fixed_[static_cast<std::size_t>(emitted_)];
      break;
    case AdversaryKind::IidSampler: {
      if (iid_kind_ == IidKind::UniformSphere) {
        out = standard_gaussian_sample(stream_, n_);
        double norm = out.norm();
        while (norm == 0.0) {
          out = standard_gaussian_sample(stream_, n_);
          norm = out.norm();
        }
        out /= norm;
      } else {
        out = VecN(n_);
        const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
        for (int i = 0; i < n_; ++i) out[i] = scale * stream_.next_sign();
      }
      break;
    }
  }
  ++emitted_;
  return out;
}

}  // namespace ovb
