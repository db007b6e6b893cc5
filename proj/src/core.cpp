#include "ovb/core.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ovb {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer; bijective, passes the usual statistical batteries
// when driven in counter mode.
std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_key(std::uint64_t master_seed, std::uint64_t stream_id) {
  return mix64(mix64(master_seed + kGolden) ^ mix64(stream_id + 2 * kGolden));
}

}  // namespace

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed),
      stream_id_(stream_id),
      key_(derive_key(master_seed, stream_id)) {}

std::uint64_t RandomStream::next_u64() {
  counter_ += kGolden;
  return mix64(key_ + counter_);
}

double RandomStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 in (0,1] keeps the log finite.
  const double u1 = 1.0 - next_unit();
  const double u2 = next_unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

int RandomStream::next_sign() { return (next_u64() >> 63) ? 1 : -1; }

std::uint64_t RandomStream::next_below(std::uint64_t m) {
  if (m == 0) throw std::invalid_argument("next_below: m must be positive");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % m;
  std::uint64_t draw;
  do {
    draw = next_u64();
  } while (draw >= limit);
  return draw % m;
}

RandomStream RandomStream::substream(std::uint64_t k) const {
  return RandomStream(master_seed_, mix64(stream_id_ + kGolden) ^ mix64(k + 3 * kGolden));
}

VecN standard_gaussian_sample(RandomStream& stream, int n) {
  if (n < 1) throw std::invalid_argument("standard_gaussian_sample: n must be >= 1");
  VecN v(n);
  for (int i = 0; i < n; ++i) v[i] = stream.next_gaussian();
  return v;
}

namespace {

void check_probabilities(double total, bool any_negative) {
  if (any_negative) throw std::invalid_argument("distribution: negative probability");
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("distribution: probabilities must sum to 1 within 1e-12");
}

}  // namespace

FiniteScalarDistribution::FiniteScalarDistribution(std::vector<ScalarAtom> atoms)
    : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("distribution: no atoms");
  double total = 0.0;
  bool negative = false;
  for (const auto& a : atoms_) {
    if (!std::isfinite(a.value) || !std::isfinite(a.probability))
      throw std::invalid_argument("distribution: non-finite atom");
    negative = negative || a.probability < 0.0;
    total += a.probability;
  }
  check_probabilities(total, negative);
}

double FiniteScalarDistribution::max_abs_value() const {
  double m = 0.0;
  for (const auto& a : atoms_) m = std::max(m, std::abs(a.value));
  return m;
}

double FiniteScalarDistribution::mean() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.probability * a.value;
  return s;
}

double FiniteScalarDistribution::total_probability() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.probability;
  return s;
}

FiniteScalarDistribution FiniteScalarDistribution::uniform(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("uniform: no values");
  std::vector<ScalarAtom> atoms;
  atoms.reserve(values.size());
  const double p = 1.0 / static_cast<double>(values.size());
  double partial = 0.0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    atoms.push_back({values[i], p});
    partial += p;
  }
  // exact complement keeps the sequential sum at 1 for any atom count
  atoms.push_back({values.back(), 1.0 - partial});
  return FiniteScalarDistribution(std::move(atoms));
}

FiniteScalarDistribution FiniteScalarDistribution::point_mass(double value) {
  return FiniteScalarDistribution({{value, 1.0}});
}

FiniteVectorDistribution::FiniteVectorDistribution(std::vector<VectorAtom> atoms)
    : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("distribution: no atoms");
  dimension_ = static_cast<int>(atoms_.front().vector.size());
  if (dimension_ < 1) throw std::invalid_argument("distribution: empty vector atom");
  double total = 0.0;
  bool negative = false;
  for (const auto& a : atoms_) {
    if (a.vector.size() != dimension_)
      throw std::invalid_argument("distribution: mixed dimensions");
    if (!a.vector.allFinite() || !std::isfinite(a.probability))
      throw std::invalid_argument("distribution: non-finite atom");
    negative = negative || a.probability < 0.0;
    total += a.probability;
  }
  check_probabilities(total, negative);
}

FiniteScalarDistribution FiniteVectorDistribution::project(const VecN& direction) const {
  if (direction.size() != dimension_)
    throw std::invalid_argument("project: direction dimension mismatch");
  std::vector<ScalarAtom> atoms;
  atoms.reserve(atoms_.size());
  for (const auto& a : atoms_) atoms.push_back({direction.dot(a.vector), a.probability});
  return FiniteScalarDistribution(std::move(atoms));
}

FiniteVectorDistribution FiniteVectorDistribution::uniform(const std::vector<VecN>& vectors) {
  if (vectors.empty()) throw std::invalid_argument("uniform: no vectors");
  std::vector<VectorAtom> atoms;
  atoms.reserve(vectors.size());
  const double p = 1.0 / static_cast<double>(vectors.size());
  double partial = 0.0;
  for (std::size_t i = 0; i + 1 < vectors.size(); ++i) {
    atoms.push_back({vectors[i], p});
    partial += p;
  }
  atoms.push_back({vectors.back(), 1.0 - partial});
  return FiniteVectorDistribution(std::move(atoms));
}

FiniteVectorDistribution FiniteVectorDistribution::point_mass(const VecN& v) {
  return FiniteVectorDistribution({{v, 1.0}});
}

bool Transcript::replay_consistent(double rel_tol) const {
  VecN running = VecN::Zero(dimension);
  for (const auto& step : steps) {
    if (step.sign != 1 && step.sign != -1) return false;
    if (step.input.size() != dimension || step.prefix.size() != dimension) return false;
    running += static_cast<double>(step.sign) * step.input;
    const double scale = std::max(1.0, running.norm());
    if ((running - step.prefix).norm() > rel_tol * scale) return false;
  }
  return true;
}

void Transcript::write_csv(std::ostream& out) const {
  out << "step";
  for (int i = 1; i <= dimension; ++i) out << ",v_" << i;
  out << ",sign";
  for (int i = 1; i <= dimension; ++i) out << ",s_" << i;
  out << "\n";
  for (std::size_t t = 0; t < steps.size(); ++t) {
    out << (t + 1);
    for (int i = 0; i < dimension; ++i) out << "," << format_double(steps[t].input[i]);
    out << "," << steps[t].sign;
    for (int i = 0; i < dimension; ++i) out << "," << format_double(steps[t].prefix[i]);
    out << "\n";
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

Transcript Transcript::read_csv(std::istream& in) {
  std::string line;
  // Skip comment lines, then expect the header row.
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    break;
  }
  const auto header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "step")
    throw std::runtime_error("transcript csv: malformed header");
  const int n = static_cast<int>((header.size() - 2) / 2);
  if (header.size() != static_cast<std::size_t>(2 * n + 2))
    throw std::runtime_error("transcript csv: inconsistent column count");

  Transcript tr;
  tr.dimension = n;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error("transcript csv: bad row width");
    TranscriptStep step;
    step.input = VecN(n);
    step.prefix = VecN(n);
    for (int i = 0; i < n; ++i) step.input[i] = std::stod(fields[1 + i]);
    step.sign = std::stoi(fields[1 + n]);
    for (int i = 0; i < n; ++i) step.prefix[i] = std::stod(fields[2 + n + i]);
    tr.steps.push_back(std::move(step));
  }
  return tr;
}

std::string format_double(double x) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

}  // namespace ovb
