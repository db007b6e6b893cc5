#pragma once

#include "ovb/core.hpp"

#include <iosfwd>
#include <vector>

namespace ovb {

/// Finite antipodally-symmetric subset of the unit sphere with covering
/// radius epsilon. Covering is exact for n <= 2 and a probabilistic
/// certificate (probe-validated) for n >= 3.
struct Net {
  int dimension = 0;
  double epsilon = 0.0;
  std::vector<VecN> points;

  int size() const { return static_cast<int>(points.size()); }

  struct Nearest {
    int index = -1;
    double distance = 0.0;
  };
  /// Nearest net point by linear scan; ties resolve to the lowest index.
  Nearest nearest(const VecN& u) const;

  void write_csv(std::ostream& out) const;
  static Net read_csv(std::istream& in, double epsilon);
};

struct NetOptions {
  /// Hard refusal threshold on the (3/eps)^n size bound.
  double max_points = 1e7;
  /// Greedy packing stops after this many consecutive rejections (n >= 3).
  int rejection_limit = 10000;
};

/// Epsilon-net of S^{n-1}. n=1 gives {+1,-1} with epsilon 0; n=2 gives
/// equispaced circle points (count rounded up to even so the net is
/// antipodal) with the exact covering radius stored; n>=3 runs a greedy
/// maximal packing over random candidates, inserting antipodal pairs.
Net build_net(int n, double epsilon, RandomStream& stream, const NetOptions& options = {});

/// Worst probe-to-net distance over random unit probes; a covering
/// certificate check for probabilistic nets.
double max_probe_distance(const Net& net, int probes, RandomStream& stream);

/// Nonnegative weights (aligned with net.points) with
/// ||sum_i lambda_i w_i - w0||_2 <= tol and ||lambda||_1 <= 1/(1-epsilon),
/// built by residual peeling. Throws if some residual direction is not
/// covered within the net's radius.
std::vector<double> conic_decompose(const VecN& w0, const Net& net, double tol);

}  // namespace ovb
