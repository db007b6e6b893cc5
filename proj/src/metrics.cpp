#include "ovb/metrics.hpp"

#include "ovb/psi2.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace ovb {

double lp_norm(const VecN& v, double p) {
  if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
  if (std::isinf(p)) return v.lpNorm<Eigen::Infinity>();
  if (p == 1.0) return v.lpNorm<1>();
  if (p == 2.0) return v.norm();
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i) s += std::pow(std::abs(v[i]), p);
  return std::pow(s, 1.0 / p);
}

DiscrepancyValues discrepancy(const Transcript& transcript, double p) {
  if (p < 1.0) throw std::invalid_argument("discrepancy: p must be >= 1");
  DiscrepancyValues out;
  for (const auto& step : transcript.steps) {
    const double norm = lp_norm(step.prefix, p);
    out.max_prefix = std::max(out.max_prefix, norm);
    out.final = norm;
  }
  return out;
}

GrowthFit growth_fit(const std::vector<GrowthPoint>& points) {
  if (points.size() < 3) throw std::invalid_argument("growth_fit: need at least 3 points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].horizon < 4.0) throw std::invalid_argument("growth_fit: horizons must be >= 4");
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (points[i].horizon == points[j].horizon)
        throw std::invalid_argument("growth_fit: horizons must be distinct");
  }

  const double m = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& pt : points) {
    const double x = std::sqrt(std::log(pt.horizon));
    sx += x;
    sy += pt.statistic;
    sxx += x * x;
    sxy += x * pt.statistic;
  }
  const double denom = m * sxx - sx * sx;
  GrowthFit fit;
  fit.slope = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / m;
  double rss = 0.0;
  for (const auto& pt : points) {
    const double x = std::sqrt(std::log(pt.horizon));
    const double r = pt.statistic - (fit.slope * x + fit.intercept);
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / m);
  return fit;
}

double empirical_direction_psi2(const std::vector<Transcript>& transcripts, int t, const VecN& w,
                                double tol) {
  if (transcripts.size() < 100)
    throw std::invalid_argument("empirical_direction_psi2: need >= 100 replicates");
  const auto& reference = transcripts.front();
  if (t < 1 || t > reference.horizon())
    throw std::invalid_argument("empirical_direction_psi2: step out of range");
  std::vector<double> samples;
  samples.reserve(transcripts.size());
  for (const auto& tr : transcripts) {
    if (tr.horizon() != reference.horizon() || tr.dimension != reference.dimension)
      throw std::invalid_argument("empirical_direction_psi2: mismatched replicates");
    for (int s = 0; s < tr.horizon(); ++s)
      if ((tr.steps[static_cast<std::size_t>(s)].input -
           reference.steps[static_cast<std::size_t>(s)].input)
              .norm() > 1e-12)
        throw std::invalid_argument("empirical_direction_psi2: replicates disagree on inputs");
    samples.push_back(w.dot(tr.steps[static_cast<std::size_t>(t - 1)].prefix));
  }
  return psi2_empirical(samples, tol);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile: q must lie in [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t below = static_cast<std::size_t>(std::floor(pos));
  if (below + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(below);
  return values[below] * (1.0 - frac) + values[below + 1] * frac;
}

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate out;
  double s = 0.0;
  for (double v : values) s += v;
  out.mean = s / static_cast<double>(values.size());
  out.median = quantile(values, 0.5);
  out.q90 = quantile(values, 0.9);
  return out;
}

DiscrepancyReport DiscrepancyReport::from_transcripts(const std::vector<Transcript>& transcripts,
                                                      const std::vector<std::uint64_t>& seeds,
                                                      const std::vector<double>& p_values) {
  if (transcripts.size() != seeds.size())
    throw std::invalid_argument("discrepancy report: seeds/transcripts size mismatch");
  DiscrepancyReport report;
  report.p_values = p_values;
  report.replicates.reserve(transcripts.size());
  for (std::size_t r = 0; r < transcripts.size(); ++r) {
    ReplicateStats stats;
    stats.replicate = static_cast<int>(r);
    stats.seed = seeds[r];
    stats.max_prefix_linf = discrepancy(transcripts[r], kInfNorm).max_prefix;
    stats.max_prefix_l2 = discrepancy(transcripts[r], 2.0).max_prefix;
    for (double p : p_values) stats.final_lp.push_back(discrepancy(transcripts[r], p).final);
    report.replicates.push_back(std::move(stats));
  }
  return report;
}

namespace {

std::vector<double> collect(const DiscrepancyReport& report,
                            double (*pick)(const ReplicateStats&)) {
  std::vector<double> out;
  out.reserve(report.replicates.size());
  for (const auto& r : report.replicates) out.push_back(pick(r));
  return out;
}

}  // namespace

Aggregate DiscrepancyReport::aggregate_max_linf() const {
  return aggregate(collect(*this, [](const ReplicateStats& r) { return r.max_prefix_linf; }));
}

Aggregate DiscrepancyReport::aggregate_max_l2() const {
  return aggregate(collect(*this, [](const ReplicateStats& r) { return r.max_prefix_l2; }));
}

Aggregate DiscrepancyReport::aggregate_final_lp(std::size_t p_index) const {
  std::vector<double> values;
  values.reserve(replicates.size());
  for (const auto& r : replicates) values.push_back(r.final_lp.at(p_index));
  return aggregate(values);
}

namespace {

std::string p_label(double p) {
  if (std::isinf(p)) return "inf";
  if (p == std::floor(p)) return std::to_string(static_cast<long long>(p));
  return format_double(p);
}

}  // namespace

void DiscrepancyReport::write_csv(std::ostream& out) const {
  out << "replicate,seed,max_prefix_linf,max_prefix_l2";
  for (double p : p_values) out << ",final_l" << p_label(p);
  out << "\n";
  for (const auto& r : replicates) {
    out << r.replicate << "," << r.seed << "," << format_double(r.max_prefix_linf) << ","
        << format_double(r.max_prefix_l2);
    for (double v : r.final_lp) out << "," << format_double(v);
    out << "\n";
  }
}

}  // namespace ovb
