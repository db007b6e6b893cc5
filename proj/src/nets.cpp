#include "ovb/nets.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ovb {

Net::Nearest Net::nearest(const VecN& u) const {
  Nearest best;
  for (int i = 0; i < size(); ++i) {
    const double d = (points[i] - u).norm();
    if (best.index < 0 || d < best.distance) {
      best.index = i;
      best.distance = d;
    }
  }
  return best;
}

void Net::write_csv(std::ostream& out) const {
  for (int i = 1; i <= dimension; ++i) out << (i > 1 ? "," : "") << "x_" << i;
  out << "\n";
  for (const auto& p : points) {
    for (int i = 0; i < dimension; ++i) out << (i > 0 ? "," : "") << format_double(p[i]);
    out << "\n";
  }
}

Net Net::read_csv(std::istream& in, double epsilon) {
  std::string line;
  Net net;
  net.epsilon = epsilon;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<double> coords;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) coords.push_back(std::stod(field));
    VecN p(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) p[static_cast<int>(i)] = coords[i];
    if (net.points.empty()) net.dimension = static_cast<int>(p.size());
    net.points.push_back(std::move(p));
  }
  if (net.points.empty()) throw std::runtime_error("net csv: no points");
  return net;
}

namespace {

VecN uniform_unit_vector(RandomStream& stream, int n) {
  VecN v = standard_gaussian_sample(stream, n);
  double norm = v.norm();
  while (norm == 0.0) {
    v = standard_gaussian_sample(stream, n);
    norm = v.norm();
  }
  return v / norm;
}

void check_size_bound(int n, double epsilon, double max_points) {
  // log-space to survive large n.
  const double log_bound = n * std::log(3.0 / epsilon);
  if (log_bound > std::log(max_points))
    throw std::runtime_error("build_net: size bound (3/eps)^n exceeds the memory cap");
}

}  // namespace

Net build_net(int n, double epsilon, RandomStream& stream, const NetOptions& options) {
  if (n < 1) throw std::invalid_argument("build_net: n must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("build_net: epsilon must lie in (0,1)");
  check_size_bound(n, epsilon, options.max_points);

  Net net;
  net.dimension = n;

  if (n == 1) {
    // S^0 is two points; the supremum over directions is an exact maximum.
    net.epsilon = 0.0;
    net.points.push_back(VecN::Constant(1, 1.0));
    net.points.push_back(VecN::Constant(1, -1.0));
    return net;
  }

  if (n == 2) {
    // Equispaced angles with chord spacing <= epsilon. An even count keeps
    // the net antipodal; the stored radius is the exact covering radius.
    const double max_angle = 2.0 * std::asin(0.5 * epsilon);
    int count = static_cast<int>(std::ceil(2.0 * std::numbers::pi / max_angle));
    if (count % 2 == 1) ++count;
    if (count < 2) count = 2;
    const double step = 2.0 * std::numbers::pi / count;
    for (int k = 0; k < count; ++k) {
      VecN p(2);
      p[0] = std::cos(k * step);
      p[1] = std::sin(k * step);
      net.points.push_back(std::move(p));
    }
    // Adjacent chord spacing; the true covering radius is half the angle.
    net.epsilon = 2.0 * std::sin(0.5 * step);
    return net;
  }

  // Greedy maximal packing. A candidate is accepted when it keeps distance
  // >= epsilon to the current (symmetric) set; its antipode then does too,
  // so pairs are inserted and the set stays antipodal and epsilon-separated.
  net.epsilon = epsilon;
  const double hard_cap = std::pow(3.0 / epsilon, n);
  int rejections = 0;
  while (rejections < options.rejection_limit) {
    const VecN candidate = uniform_unit_vector(stream, n);
    bool far_enough = true;
    for (const auto& p : net.points) {
      if ((candidate - p).norm() < epsilon) {
        far_enough = false;
        break;
      }
    }
    if (!far_enough) {
      ++rejections;
      continue;
    }
    rejections = 0;
    net.points.push_back(candidate);
    net.points.push_back(-candidate);
    if (static_cast<double>(net.points.size()) > hard_cap)
      throw std::logic_error("build_net: packing exceeded the (3/eps)^n bound");
  }
  return net;
}

double max_probe_distance(const Net& net, int probes, RandomStream& stream) {
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    const VecN probe = uniform_unit_vector(stream, net.dimension);
    worst = std::max(worst, net.nearest(probe).distance);
  }
  return worst;
}

std::vector<double> conic_decompose(const VecN& w0, const Net& net, double tol) {
  if (net.points.empty()) throw std::invalid_argument("conic_decompose: empty net");
  if (w0.size() != net.dimension)
    throw std::invalid_argument("conic_decompose: dimension mismatch");
  if (std::abs(w0.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("conic_decompose: w0 must be a unit vector");
  if (!(tol > 0.0)) throw std::invalid_argument("conic_decompose: tol must be positive");

  std::vector<double> lambda(net.points.size(), 0.0);
  VecN residual = w0;
  double scale = residual.norm();
  while (scale > tol) {
    const VecN direction = residual / scale;
    const auto hit = net.nearest(direction);
    if (hit.distance > net.epsilon + 1e-12) {
      std::ostringstream msg;
      msg << "conic_decompose: direction not covered (distance " << hit.distance << " > eps "
          << net.epsilon << ")";
      throw std::runtime_error(msg.str());
    }
    lambda[static_cast<std::size_t>(hit.index)] += scale;
    residual = scale * (direction - net.points[static_cast<std::size_t>(hit.index)]);
    scale = residual.norm();
  }
  return lambda;
}

}  // namespace ovb
