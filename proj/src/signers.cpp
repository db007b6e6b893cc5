#include "ovb/signers.hpp"

#include <cmath>
#include <stdexcept>

namespace ovb {

SignerKind signer_kind_from_string(const std::string& name) {
  if (name == "uniform-random") return SignerKind::UniformRandom;
  if (name == "greedy") return SignerKind::Greedy;
  if (name == "self-balancing-walk") return SignerKind::SelfBalancingWalk;
  if (name == "tree-certified") return SignerKind::TreeCertified;
  throw std::invalid_argument("unknown signer strategy: " + name);
}

std::string to_string(SignerKind kind) {
  switch (kind) {
    case SignerKind::UniformRandom: return "uniform-random";
    case SignerKind::Greedy: return "greedy";
    case SignerKind::SelfBalancingWalk: return "self-balancing-walk";
    case SignerKind::TreeCertified: return "tree-certified";
  }
  return "?";
}

double default_walk_scale(int n, std::optional<int> horizon) {
  if (horizon.has_value())
    return 10.0 * std::sqrt(std::log(2.0 * n * static_cast<double>(*horizon)));
  return 10.0;
}

Signer::Signer(SignerKind kind, int n, const SignerParams& params, RandomStream stream)
    : kind_(kind), n_(n), prefix_(VecN::Zero(n)), stream_(stream) {
  if (n < 1) throw std::invalid_argument("signer: dimension must be >= 1");
  switch (kind_) {
    case SignerKind::UniformRandom:
    case SignerKind::Greedy:
      break;
    case SignerKind::SelfBalancingWalk:
      if (!params.walk_scale.has_value())
        throw std::invalid_argument("self-balancing-walk: parameter c missing");
      if (!(*params.walk_scale > 0.0))
        throw std::invalid_argument("self-balancing-walk: c must be positive");
      walk_scale_ = *params.walk_scale;
      break;
    case SignerKind::TreeCertified: {
      if (!params.certificate.has_value() || !params.net.has_value() ||
          !params.horizon.has_value())
        throw std::invalid_argument("tree-certified: certificate, net and horizon required");
      certificate_ = params.certificate;
      net_ = params.net;
      horizon_ = *params.horizon;
      if (certificate_->base.dimension() != n)
        throw std::invalid_argument("tree-certified: certificate dimension mismatch");
      if (net_->dimension != n)
        throw std::invalid_argument("tree-certified: net dimension mismatch");
      if (horizon_ > certificate_->base.min_leaf_depth())
        throw std::invalid_argument("tree-certified: horizon exceeds certified tree depth");
      // The clone index is drawn once; afterwards the signer is deterministic.
      clone_ = 1 + static_cast<int>(
                       stream_.next_below(static_cast<std::uint64_t>(certificate_->clone_count)));
      position_ = certificate_->base.root();
      break;
    }
  }
}

int Signer::certified_step(const VecN& v) {
  if (steps_ >= horizon_) throw std::runtime_error("tree-certified: horizon exhausted");
  const double norm = v.norm();
  if (norm == 0.0) return +1;  // degenerate input: sign +1, hold position
  const auto snapped = net_->nearest(v / norm);
  const VecN& label = net_->points[static_cast<std::size_t>(snapped.index)];
  for (int e : certificate_->base.child_edges(position_)) {
    if ((certificate_->base.edge(e).vector - label).norm() <= 1e-12) {
      position_ = certificate_->base.edge(e).child;
      return certificate_->sign_for(e, clone_);
    }
  }
  throw std::runtime_error("tree-certified: no certified edge for snapped direction");
}

int Signer::step(const VecN& v) {
  if (v.size() != n_) throw std::invalid_argument("signer: input dimension mismatch");
  if (v.norm() > 1.0 + 1e-12) throw std::invalid_argument("signer: input norm exceeds 1");

  int sign = 0;
  switch (kind_) {
    case SignerKind::UniformRandom:
      sign = stream_.next_sign();
      break;
    case SignerKind::Greedy: {
      const double alignment = prefix_.dot(v);
      sign = std::abs(alignment) <= 1e-12 ? +1 : (alignment > 0.0 ? -1 : +1);
      break;
    }
    case SignerKind::SelfBalancingWalk: {
      double p_plus = 0.5 - prefix_.dot(v) / (2.0 * walk_scale_);
      p_plus = std::min(1.0, std::max(0.0, p_plus));
      sign = stream_.next_unit() < p_plus ? +1 : -1;
      break;
    }
    case SignerKind::TreeCertified:
      sign = certified_step(v);
      break;
  }
  prefix_ += static_cast<double>(sign) * v;
  ++steps_;
  return sign;
}

Transcript run_signer(Signer& signer, const std::vector<VecN>& inputs) {
  Transcript tr;
  tr.dimension = signer.dimension();
  tr.steps.reserve(inputs.size());
  for (const auto& v : inputs) {
    TranscriptStep step;
    step.input = v;
    step.sign = signer.step(v);
    step.prefix = signer.prefix();
    tr.steps.push_back(std::move(step));
  }
  return tr;
}

}  // namespace ovb
