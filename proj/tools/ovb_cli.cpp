// Experiment harness: reproducible signer-vs-adversary runs, the lower-bound
// sweep, 1-D tree balancing, certified-distribution search, Monte Carlo
// verification, and edge orientation. Outputs are byte-stable for a fixed
// config and master seed.

#include <CLI11.hpp>
#include <json.hpp>

#include "ovb/adversaries.hpp"
#include "ovb/core.hpp"
#include "ovb/gauss1d.hpp"
#include "ovb/metrics.hpp"
#include "ovb/nets.hpp"
#include "ovb/psi2.hpp"
#include "ovb/signers.hpp"
#include "ovb/tree.hpp"
#include "ovb/verify.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace ovb;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBoundFailure = 2;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat key=value configuration; every key must be consumed by the
// subcommand, so misspellings fail loudly instead of silently defaulting.
class Config {
 public:
  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
        line.pop_back();
      std::size_t start = line.find_first_not_of(" \t");
      if (start == std::string::npos) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
      set(line.substr(start, eq - start), line.substr(eq + 1));
    }
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  void apply_overrides(const std::vector<std::string>& overrides) {
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got: " + kv);
      set(kv.substr(0, eq), kv.substr(eq + 1));
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require_string(const std::string& key) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required config key: " + key);
    return it->second;
  }

  long long get_int(const std::string& key, long long fallback) {
    const std::string raw = get_string(key, "");
    if (raw.empty()) return fallback;
    try {
      return std::stoll(raw);
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not an integer: " + raw);
    }
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) {
    const std::string raw = get_string(key, "");
    if (raw.empty()) return fallback;
    try {
      return std::stoull(raw);
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not an unsigned integer: " + raw);
    }
  }

  double get_double(const std::string& key, double fallback) {
    const std::string raw = get_string(key, "");
    if (raw.empty()) return fallback;
    if (raw == "inf") return kInfNorm;
    try {
      return std::stod(raw);
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not a number: " + raw);
    }
  }

  bool get_bool(const std::string& key, bool fallback) {
    const std::string raw = get_string(key, "");
    if (raw.empty()) return fallback;
    if (raw == "1" || raw == "true") return true;
    if (raw == "0" || raw == "false") return false;
    throw ConfigError("config key " + key + ": expected 0/1, got: " + raw);
  }

  std::vector<double> get_double_list(const std::string& key, const std::string& fallback) {
    const std::string raw = get_string(key, fallback);
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string field;
    while (std::getline(ss, field, ',')) {
      if (field == "inf")
        out.push_back(kInfNorm);
      else
        out.push_back(std::stod(field));
    }
    if (out.empty()) throw ConfigError("config key " + key + ": empty list");
    return out;
  }

  std::vector<int> get_int_list(const std::string& key, const std::string& fallback) {
    const std::string raw = get_string(key, fallback);
    std::vector<int> out;
    std::stringstream ss(raw);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(std::stoi(field));
    if (out.empty()) throw ConfigError("config key " + key + ": empty list");
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : values_)
      if (consumed_.count(key) == 0) throw ConfigError("unknown config key: " + key);
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
};

struct RunContext {
  std::string subcommand;
  std::uint64_t master_seed = 1;
  int jobs = 1;
  fs::path out_dir;
  Config config;

  RandomStream stream(std::uint64_t id) const { return RandomStream(master_seed, id); }

  std::string preamble() const {
    std::ostringstream out;
    out << "# artifact_version=" << kVersion << "\n";
    out << "# subcommand=" << subcommand << "\n";
    out << "# master_seed=" << master_seed << "\n";
    for (const auto& [key, value] : config.values()) out << "# " << key << "=" << value << "\n";
    return out.str();
  }

  json config_echo() const {
    json echo;
    echo["subcommand"] = subcommand;
    echo["master_seed"] = master_seed;
    for (const auto& [key, value] : config.values()) echo[key] = value;
    return echo;
  }

  json json_header() const {
    json doc;
    doc["version"] = kVersion;
    doc["config"] = config_echo();
    return doc;
  }

  void write_text(const std::string& name, const std::string& body) const {
    fs::create_directories(out_dir);
    std::ofstream out(out_dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (out_dir / name).string());
    out << body;
  }

  void write_json(const std::string& name, const json& doc) const {
    write_text(name, doc.dump(2) + "\n");
  }
};

// Deterministic replicate fan-out: results land in a pre-sized vector
// indexed by replicate, so the worker count never changes the output.
template <typename Fn>
void parallel_replicates(int count, int jobs, Fn&& fn) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int r = 0; r < count; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&]() {
      int r;
      while ((r = next.fetch_add(1)) < count) fn(r);
    });
  }
  for (auto& t : pool) t.join();
}

Net one_dim_net() {
  Net net;
  net.dimension = 1;
  net.epsilon = 0.0;
  net.points.push_back(VecN::Constant(1, 1.0));
  net.points.push_back(VecN::Constant(1, -1.0));
  return net;
}

std::vector<std::pair<int, int>> load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open edge list: " + path);
  std::vector<std::pair<int, int>> edges;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    int u = 0, v = 0;
    if (!(row >> u >> v)) throw ConfigError("edge list: malformed line: " + line);
    edges.emplace_back(u, v);
  }
  return edges;
}

std::vector<VecN> load_inputs_from_transcript(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open transcript: " + path);
  const Transcript tr = Transcript::read_csv(in);
  std::vector<VecN> inputs;
  inputs.reserve(tr.steps.size());
  for (const auto& step : tr.steps) inputs.push_back(step.input);
  return inputs;
}

json aggregate_json(const Aggregate& agg) {
  return json{{"mean", agg.mean}, {"median", agg.median}, {"q90", agg.q90}};
}

struct SignerSetup {
  SignerKind kind;
  SignerParams params;
  std::optional<double> user_walk_scale;

  // Walk scale defaults per run horizon when the config leaves c unset.
  SignerParams params_for(int n, int horizon) const {
    SignerParams p = params;
    if (kind == SignerKind::SelfBalancingWalk)
      p.walk_scale = user_walk_scale.value_or(default_walk_scale(n, horizon));
    if (kind == SignerKind::TreeCertified) p.horizon = horizon;
    return p;
  }
};

SignerSetup make_signer_setup(RunContext& ctx, const std::string& default_signer) {
  SignerSetup setup;
  setup.kind = signer_kind_from_string(ctx.config.get_string("signer", default_signer));
  if (ctx.config.has("c")) setup.user_walk_scale = ctx.config.get_double("c", 0.0);
  ctx.config.get_double("c", 0.0);
  if (setup.kind == SignerKind::TreeCertified) {
    const std::string cert_path = ctx.config.require_string("cert_file");
    std::ifstream in(cert_path);
    if (!in) throw ConfigError("cannot open certificate: " + cert_path);
    setup.params.certificate = CertifiedDistribution::read_csv(in);
    const int cert_n = setup.params.certificate->base.dimension();
    if (cert_n == 1) {
      setup.params.net = one_dim_net();
      ctx.config.get_double("net_epsilon", 0.1);
    } else {
      RandomStream net_stream = ctx.stream(1ull << 62);
      setup.params.net =
          build_net(cert_n, ctx.config.get_double("net_epsilon", 0.1), net_stream);
    }
  }
  return setup;
}

// ---------------------------------------------------------------------------
// simulate

int run_simulate(RunContext& ctx) {
  const int n = static_cast<int>(ctx.config.get_int("n", 2));
  const int T = static_cast<int>(ctx.config.get_int("T", 100));
  const int replicates = static_cast<int>(ctx.config.get_int("replicates", 100));
  const auto p_values = ctx.config.get_double_list("p_list", "2,inf");
  const bool write_transcripts = ctx.config.get_bool("write_transcripts", false);
  const double log_base = ctx.config.get_double("log_base", 2.0);

  const AdversaryKind adv_kind =
      adversary_kind_from_string(ctx.config.get_string("adversary", "iid-sampler"));
  AdversaryParams adv_params;
  adv_params.log_base = log_base;
  if (adv_kind == AdversaryKind::IidSampler) {
    const std::string iid = ctx.config.get_string("iid", "sphere");
    if (iid == "sphere")
      adv_params.iid_kind = IidKind::UniformSphere;
    else if (iid == "cube")
      adv_params.iid_kind = IidKind::SignedHypercube;
    else
      throw ConfigError("iid must be sphere or cube");
  } else {
    ctx.config.get_string("iid", "sphere");
  }
  if (adv_kind == AdversaryKind::FixedSequence)
    adv_params.sequence = load_inputs_from_transcript(ctx.config.require_string("sequence_file"));
  else
    ctx.config.get_string("sequence_file", "");
  if (adv_kind == AdversaryKind::EdgeStream) {
    adv_params.vertices = static_cast<int>(ctx.config.get_int("vertices", n));
    if (ctx.config.has("edge_file"))
      adv_params.edges = load_edge_list(ctx.config.require_string("edge_file"));
    else
      ctx.config.get_string("edge_file", "");
  } else {
    ctx.config.get_int("vertices", n);
    ctx.config.get_string("edge_file", "");
  }

  const SignerSetup signer_setup = make_signer_setup(ctx, "uniform-random");
  ctx.config.reject_unknown();

  std::vector<Transcript> transcripts(static_cast<std::size_t>(replicates));
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(replicates));
  parallel_replicates(replicates, ctx.jobs, [&](int r) {
    const std::uint64_t base = static_cast<std::uint64_t>(r);
    seeds[static_cast<std::size_t>(r)] = base;
    Signer signer(signer_setup.kind, n, signer_setup.params_for(n, T), ctx.stream(2 * base));
    Adversary adversary(adv_kind, n, T, adv_params, ctx.stream(2 * base + 1));
    Transcript tr;
    tr.dimension = n;
    tr.steps.reserve(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
      TranscriptStep step;
      if (adv_kind == AdversaryKind::AdaptiveOrthogonal) {
        const VecN prefix = signer.prefix();
        step.input = adversary.next(&prefix);
      } else {
        step.input = adversary.next();
      }
      step.sign = signer.step(step.input);
      step.prefix = signer.prefix();
      tr.steps.push_back(std::move(step));
    }
    transcripts[static_cast<std::size_t>(r)] = std::move(tr);
  });

  const auto report = DiscrepancyReport::from_transcripts(transcripts, seeds, p_values);

  std::ostringstream csv;
  csv << ctx.preamble();
  report.write_csv(csv);
  ctx.write_text("discrepancy.csv", csv.str());

  json summary = ctx.json_header();
  summary["replicates"] = replicates;
  json rows = json::array();
  for (const auto& r : report.replicates) {
    json row = {{"replicate", r.replicate},
                {"seed", r.seed},
                {"max_prefix_linf", r.max_prefix_linf},
                {"max_prefix_l2", r.max_prefix_l2}};
    for (std::size_t i = 0; i < p_values.size(); ++i) {
      const std::string label =
          std::isinf(p_values[i]) ? "inf" : format_double(p_values[i]);
      row["final_l" + label] = r.final_lp[i];
    }
    rows.push_back(std::move(row));
  }
  summary["per_replicate"] = rows;
  summary["aggregates"]["max_prefix_linf"] = aggregate_json(report.aggregate_max_linf());
  summary["aggregates"]["max_prefix_l2"] = aggregate_json(report.aggregate_max_l2());
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    const std::string label =
        std::isinf(p_values[i]) ? "inf" : format_double(p_values[i]);
    summary["aggregates"]["final_l" + label] = aggregate_json(report.aggregate_final_lp(i));
  }
  ctx.write_json("summary.json", summary);

  if (write_transcripts) {
    for (int r = 0; r < replicates; ++r) {
      std::ostringstream name;
      name << "transcript_" << r << ".csv";
      std::ostringstream body;
      body << ctx.preamble();
      transcripts[static_cast<std::size_t>(r)].write_csv(body);
      ctx.write_text(name.str(), body.str());
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// lowerbound

int run_lowerbound(RunContext& ctx) {
  const auto horizons = ctx.config.get_int_list("T_list", "64,256,1024,4096");
  const int replicates = static_cast<int>(ctx.config.get_int("replicates", 200));
  const double q = ctx.config.get_double("quantile", 0.9);
  const double log_base = ctx.config.get_double("log_base", 2.0);
  const SignerSetup signer_setup = make_signer_setup(ctx, "uniform-random");
  ctx.config.reject_unknown();

  struct PerHorizon {
    int T = 0;
    int k = 0;
    std::uint64_t blocks = 0;
    std::uint64_t matches = 0;
    double max_norm_deviation = 0.0;
    std::vector<double> max_linf;
  };
  std::vector<PerHorizon> rows;

  AdversaryParams adv_params;
  adv_params.log_base = log_base;

  for (std::size_t h = 0; h < horizons.size(); ++h) {
    const int T = horizons[h];
    PerHorizon row;
    row.T = T;
    row.k = block_length(T, log_base);
    row.max_linf.resize(static_cast<std::size_t>(replicates));
    std::vector<std::uint64_t> blocks(static_cast<std::size_t>(replicates), 0);
    std::vector<std::uint64_t> matches(static_cast<std::size_t>(replicates), 0);
    std::vector<double> deviations(static_cast<std::size_t>(replicates), 0.0);

    parallel_replicates(replicates, ctx.jobs, [&](int r) {
      const std::uint64_t id = 2 * (static_cast<std::uint64_t>(h) * replicates +
                                    static_cast<std::uint64_t>(r));
      Adversary adversary(AdversaryKind::ObliviousBlock, 2, T, adv_params, ctx.stream(id + 1));
      Signer signer(signer_setup.kind, 2, signer_setup.params_for(2, T), ctx.stream(id));
      const int k = adversary.block_len();
      double max_linf = 0.0;
      std::vector<int> signs;
      std::vector<VecN> inputs;
      signs.reserve(static_cast<std::size_t>(T));
      inputs.reserve(static_cast<std::size_t>(T));
      for (int t = 0; t < T; ++t) {
        const VecN v = adversary.next();
        inputs.push_back(v);
        signs.push_back(signer.step(v));
        max_linf = std::max(max_linf, signer.prefix().lpNorm<Eigen::Infinity>());
        if ((t + 1) % k == 0) {  // a full block just ended
          const int block = t / k;
          blocks[static_cast<std::size_t>(r)] += 1;
          bool match = true;
          for (int i = 0; i < k && match; ++i)
            match = signs[static_cast<std::size_t>(block * k + i)] ==
                    adversary.block_signs()[static_cast<std::size_t>(block)]
                                           [static_cast<std::size_t>(i)];
          if (match) {
            matches[static_cast<std::size_t>(r)] += 1;
            VecN sum = VecN::Zero(2);
            for (int i = 0; i < k; ++i)
              sum += static_cast<double>(signs[static_cast<std::size_t>(block * k + i)]) *
                     inputs[static_cast<std::size_t>(block * k + i)];
            deviations[static_cast<std::size_t>(r)] =
                std::max(deviations[static_cast<std::size_t>(r)],
                         std::abs(sum.norm() - std::sqrt(static_cast<double>(k))));
          }
        }
      }
      row.max_linf[static_cast<std::size_t>(r)] = max_linf;
    });

    for (int r = 0; r < replicates; ++r) {
      row.blocks += blocks[static_cast<std::size_t>(r)];
      row.matches += matches[static_cast<std::size_t>(r)];
      row.max_norm_deviation = std::max(row.max_norm_deviation,
                                        deviations[static_cast<std::size_t>(r)]);
    }
    rows.push_back(std::move(row));
  }

  std::vector<GrowthPoint> points;
  std::ostringstream csv;
  csv << ctx.preamble();
  csv << "T,k,blocks,matches,match_freq,expected_freq,freq_se,max_norm_deviation,quantile_max_"
         "linf,mean_max_linf\n";
  for (const auto& row : rows) {
    const double freq = static_cast<double>(row.matches) / static_cast<double>(row.blocks);
    const double expected = std::pow(2.0, -row.k);
    const double se = std::sqrt(expected * (1.0 - expected) / static_cast<double>(row.blocks));
    const double stat = quantile(row.max_linf, q);
    points.push_back({static_cast<double>(row.T), stat});
    csv << row.T << "," << row.k << "," << row.blocks << "," << row.matches << ","
        << format_double(freq) << "," << format_double(expected) << "," << format_double(se)
        << "," << format_double(row.max_norm_deviation) << "," << format_double(stat) << ","
        << format_double(aggregate(row.max_linf).mean) << "\n";
  }
  ctx.write_text("lowerbound.csv", csv.str());

  json summary = ctx.json_header();
  bool slope_ok = true;
  if (points.size() >= 3) {
    const GrowthFit fit = growth_fit(points);
    summary["growth_fit"] = {
        {"slope", fit.slope}, {"intercept", fit.intercept}, {"residual", fit.residual}};
    slope_ok = fit.slope > 0.0;
  } else {
    summary["growth_fit"] = nullptr;  // needs at least 3 horizons
  }
  json per_t = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    per_t.push_back({{"T", rows[i].T},
                     {"k", rows[i].k},
                     {"quantile_max_linf", points[i].statistic},
                     {"match_freq", static_cast<double>(rows[i].matches) /
                                        static_cast<double>(rows[i].blocks)},
                     {"expected_freq", std::pow(2.0, -rows[i].k)}});
  }
  summary["horizons"] = per_t;
  ctx.write_json("summary.json", summary);

  return slope_ok ? kExitOk : kExitBoundFailure;
}

// ---------------------------------------------------------------------------
// tree-balance

int run_tree_balance(RunContext& ctx) {
  const double beta = ctx.config.get_double("beta", kDefaultStarBeta);
  TreeSpec tree;
  if (ctx.config.has("tree_file")) {
    const std::string path = ctx.config.require_string("tree_file");
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open tree file: " + path);
    tree = TreeSpec::read_text(in);
    ctx.config.get_int("edges", 0);
  } else {
    ctx.config.get_string("tree_file", "");
    const int edges = static_cast<int>(ctx.config.get_int("edges", 100));
    RandomStream stream = ctx.stream(0);
    tree = random_tree_1d(edges, stream);
  }
  const double default_measure = 1.0 - 0.5 / static_cast<double>(tree.edge_count());
  const double measure = ctx.config.get_double("measure", default_measure);
  ctx.config.reject_unknown();

  const Interval K = symmetric_interval_for_measure(measure);
  const auto result = balance_tree_1d(tree, beta, K);

  // verify both claims over the constructed bodies and signs
  bool claim1 = true, claim2 = true;
  double worst_measure_slack = std::numeric_limits<double>::infinity();
  double max_scaled_prefix = 0.0;
  std::vector<double> prefixes(static_cast<std::size_t>(tree.node_count()), 0.0);
  std::ostringstream bodies_csv;
  bodies_csv << ctx.preamble();
  bodies_csv << "node,lo,hi,measure,required_measure,prefix\n";
  for (int i = 0; i < tree.node_count(); ++i) {
    const Interval& body = result.bodies[static_cast<std::size_t>(i)];
    const double got = gaussian_measure(body);
    const double required =
        1.0 - tree.subtree_size(i) / (2.0 * static_cast<double>(tree.edge_count()));
    worst_measure_slack = std::min(worst_measure_slack, got - required);
    if (got < required - 1e-9) claim1 = false;
    double prefix = 0.0;
    for (int e : tree.path_edges(i))
      prefix += result.signs[static_cast<std::size_t>(e)] * tree.edge(e).vector[0];
    prefixes[static_cast<std::size_t>(i)] = prefix;
    if (!body.contains(beta * prefix, 1e-12)) claim2 = false;
    max_scaled_prefix = std::max(max_scaled_prefix, std::abs(prefix) / (K.hi / beta));
    bodies_csv << i << "," << format_double(body.lo) << "," << format_double(body.hi) << ","
               << format_double(got) << "," << format_double(required) << ","
               << format_double(prefix) << "\n";
  }
  ctx.write_text("bodies.csv", bodies_csv.str());

  std::ostringstream tree_text;
  tree_text << ctx.preamble();
  tree.write_text(tree_text);
  ctx.write_text("tree.txt", tree_text.str());

  json summary = ctx.json_header();
  summary["edges"] = tree.edge_count();
  summary["beta"] = beta;
  summary["K_half_width"] = K.hi;
  summary["claim1"] = claim1 ? "pass" : "fail";
  summary["claim2"] = claim2 ? "pass" : "fail";
  summary["worst_measure_slack"] = worst_measure_slack;
  summary["max_prefix_over_scaled_body"] = max_scaled_prefix;
  ctx.write_json("balance.json", summary);

  return (claim1 && claim2) ? kExitOk : kExitBoundFailure;
}

// ---------------------------------------------------------------------------
// search-distribution

int run_search(RunContext& ctx) {
  TreeSpec tree;
  if (ctx.config.has("tree_file")) {
    const std::string path = ctx.config.require_string("tree_file");
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open tree file: " + path);
    tree = TreeSpec::read_text(in);
    ctx.config.get_string("tree", "");
  } else {
    const std::string shape = ctx.config.get_string("tree", "path:2");
    ctx.config.get_string("tree_file", "");
    const auto colon = shape.find(':');
    if (colon == std::string::npos) throw ConfigError("tree must look like path:L or net1d:D");
    const std::string kind = shape.substr(0, colon);
    const int size = std::stoi(shape.substr(colon + 1));
    if (kind == "path") {
      std::vector<TreeEdge> edges;
      for (int i = 0; i < size; ++i) {
        TreeEdge e;
        e.parent = i;
        e.child = i + 1;
        e.vector = VecN::Constant(1, 1.0);
        edges.push_back(std::move(e));
      }
      tree = TreeSpec(1, size + 1, std::move(edges));
    } else if (kind == "net1d") {
      tree = net_tree(one_dim_net(), size);
    } else {
      throw ConfigError("tree must look like path:L or net1d:D");
    }
  }

  const int clone_count = static_cast<int>(ctx.config.get_int("N", 1));
  const double threshold = ctx.config.get_double("threshold", 10.0);
  SearchOptions options;
  options.max_assignments = ctx.config.get_u64("cap", options.max_assignments);
  options.tol = ctx.config.get_double("tol", options.tol);
  options.jobs = ctx.jobs;

  Net net;
  if (tree.dimension() == 1) {
    net = one_dim_net();
    ctx.config.get_double("net_epsilon", 0.1);
  } else {
    RandomStream net_stream = ctx.stream(1ull << 62);
    net = build_net(tree.dimension(), ctx.config.get_double("net_epsilon", 0.1), net_stream);
  }
  ctx.config.reject_unknown();

  const auto report = search_subgaussian_distribution(tree, clone_count, threshold, net, options);

  std::ostringstream cert_csv;
  cert_csv << ctx.preamble();
  report.result.write_csv(cert_csv);
  ctx.write_text("certificate.csv", cert_csv.str());

  std::ostringstream net_csv;
  net_csv << ctx.preamble();
  net.write_csv(net_csv);
  ctx.write_text("net.csv", net_csv.str());

  json summary = ctx.json_header();
  summary["certified"] = report.certified;
  summary["worst_upper"] = report.worst_upper;
  summary["threshold"] = threshold;
  summary["assignment_index"] = report.assignment_index;
  summary["assignments_total"] = report.assignments_total;
  json nodes = json::array();
  for (const auto& cert : report.result.certificates) {
    nodes.push_back({{"node", cert.node},
                     {"lower", cert.bracket.lower},
                     {"upper", cert.bracket.upper},
                     {"net_epsilon", cert.bracket.net_epsilon}});
  }
  summary["node_certificates"] = nodes;
  ctx.write_json("search.json", summary);

  return report.certified ? kExitOk : kExitBoundFailure;
}

// ---------------------------------------------------------------------------
// verify

json mc_record(const McResult& res, const json& params) {
  json rec;
  rec["operation"] = res.operation;
  rec["params"] = params;
  rec["estimate"] = res.estimate;
  rec["se"] = res.standard_error;
  rec["samples"] = res.samples;
  rec["bound"] = res.bound;
  rec["direction"] = res.direction;
  rec["satisfied"] = res.satisfied;
  rec["slack"] = res.slack;
  rec["seed"] = res.master_seed;
  rec["stream_id"] = res.stream_id;
  if (res.median_of_means) rec["median_of_means"] = true;
  for (const auto& [key, value] : res.extras) rec[key] = value;
  return rec;
}

int run_verify(RunContext& ctx) {
  const std::string suite = ctx.config.get_string("suite", "all");
  const std::uint64_t samples = ctx.config.get_u64("samples", 200000);
  const std::uint64_t trials = ctx.config.get_u64("trials", 200000);
  const std::uint64_t body_trials = ctx.config.get_u64("body_trials", 2000);
  const double C = ctx.config.get_double("C", 8.0);
  const double delta = ctx.config.get_double("delta", 0.5);
  const auto lambda_list = ctx.config.get_double_list("lambda_list", "0,0.1,0.25");
  const auto n_list = ctx.config.get_int_list("N_list", "4,16,64");
  const auto body_n_list = ctx.config.get_int_list("body_N_list", "4,16,64");
  const int rosenthal_n = static_cast<int>(ctx.config.get_int("rosenthal_N", 12));
  const auto p_list = ctx.config.get_double_list("p_list", "2,3,4,6");
  ctx.config.reject_unknown();

  const bool all = suite == "all";
  if (!all && suite != "mgf" && suite != "wtail" && suite != "body" && suite != "rosenthal")
    throw ConfigError("suite must be one of mgf, wtail, body, rosenthal, all");

  json records = json::array();
  bool ok = true;
  std::uint64_t stream_id = 0;

  if (all || suite == "mgf") {
    for (double lambda : lambda_list) {
      const auto res = mc_gaussian_mgf_check(lambda, samples, ctx.stream(stream_id++));
      ok = ok && res.satisfied;
      records.push_back(mc_record(res, {{"lambda", lambda}}));
    }
  }

  if (all || suite == "wtail") {
    std::vector<double> estimates;
    for (int N : n_list) {
      const auto res = mc_single_w_tail(C, N, trials, ctx.stream(stream_id++));
      ok = ok && res.satisfied;
      estimates.push_back(res.estimate);
      records.push_back(mc_record(res, {{"C", C}, {"N", N}}));
    }
    bool decreasing = true;
    for (std::size_t i = 0; i + 1 < estimates.size(); ++i)
      decreasing = decreasing && estimates[i] > estimates[i + 1];
    ok = ok && decreasing;
    records.push_back({{"operation", "wtail_strictly_decreasing"},
                       {"params", {{"C", C}}},
                       {"satisfied", decreasing}});
  }

  if (all || suite == "body") {
    std::vector<double> inside;
    const Net net = one_dim_net();
    for (int N : body_n_list) {
      const auto res = mc_body_measure(1, N, delta, net, body_trials, ctx.stream(stream_id++));
      inside.push_back(res.estimate);
      records.push_back(mc_record(res, {{"n", 1}, {"N", N}, {"delta", delta}}));
    }
    bool nondecreasing = true;
    for (std::size_t i = 0; i + 1 < inside.size(); ++i)
      nondecreasing = nondecreasing && inside[i] <= inside[i + 1];
    ok = ok && nondecreasing;
    records.push_back({{"operation", "body_inside_nondecreasing"},
                       {"params", {{"delta", delta}}},
                       {"satisfied", nondecreasing}});
  }

  if (all || suite == "rosenthal") {
    const auto rademacher = FiniteScalarDistribution::uniform({-1.0, 1.0});
    const auto three_point = FiniteScalarDistribution::uniform({-1.0, 0.0, 1.0});
    for (const auto& [name, dist] :
         {std::pair<std::string, const FiniteScalarDistribution*>{"rademacher", &rademacher},
          {"uniform3", &three_point}}) {
      for (int N : {1, 4, 8, rosenthal_n}) {
        for (double p : p_list) {
          const auto check = rosenthal_check(*dist, N, p);
          const bool fine = check.ratio <= 1.0;
          ok = ok && fine;
          records.push_back({{"operation", "rosenthal_check"},
                             {"params", {{"dist", name}, {"N", N}, {"p", p}}},
                             {"lhs", check.lhs},
                             {"rhs", check.rhs},
                             {"ratio", check.ratio},
                             {"satisfied", fine}});
        }
      }
    }
  }

  json doc = ctx.json_header();
  doc["records"] = records;
  doc["all_satisfied"] = ok;
  ctx.write_json("verify.json", doc);
  return ok ? kExitOk : kExitBoundFailure;
}

// ---------------------------------------------------------------------------
// orient

int run_orient(RunContext& ctx) {
  const int vertices = static_cast<int>(ctx.config.get_int("vertices", 50));
  const auto horizons = ctx.config.get_int_list("T_list", "100,10000");
  const int replicates = static_cast<int>(ctx.config.get_int("replicates", 50));
  const double q = ctx.config.get_double("quantile", 0.9);
  const SignerSetup signer_setup = make_signer_setup(ctx, "self-balancing-walk");
  ctx.config.reject_unknown();

  std::ostringstream csv;
  csv << ctx.preamble();
  csv << "T,quantile_max_imbalance,mean_max_imbalance\n";
  std::vector<double> stats;
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    const int T = horizons[h];
    std::vector<double> max_imbalance(static_cast<std::size_t>(replicates));
    AdversaryParams adv_params;
    adv_params.vertices = vertices;
    parallel_replicates(replicates, ctx.jobs, [&](int r) {
      const std::uint64_t id = 2 * (static_cast<std::uint64_t>(h) * replicates +
                                    static_cast<std::uint64_t>(r));
      Adversary adversary(AdversaryKind::EdgeStream, vertices, T, adv_params,
                          ctx.stream(id + 1));
      Signer signer(signer_setup.kind, vertices, signer_setup.params_for(vertices, T),
                    ctx.stream(id));
      double worst = 0.0;
      for (int t = 0; t < T; ++t) {
        signer.step(adversary.next());
        // vertex imbalance is sqrt(2) times the prefix coordinate
        worst = std::max(worst,
                         std::numbers::sqrt2 * signer.prefix().lpNorm<Eigen::Infinity>());
      }
      max_imbalance[static_cast<std::size_t>(r)] = worst;
    });
    const double stat = quantile(max_imbalance, q);
    stats.push_back(stat);
    csv << T << "," << format_double(stat) << ","
        << format_double(aggregate(max_imbalance).mean) << "\n";
  }
  ctx.write_text("orient.csv", csv.str());

  const double ratio = stats.back() / stats.front();
  const double sqrt_ratio =
      std::sqrt(static_cast<double>(horizons.back()) / static_cast<double>(horizons.front()));
  const bool sublinear = ratio < sqrt_ratio;

  json summary = ctx.json_header();
  summary["vertices"] = vertices;
  summary["stat_ratio"] = ratio;
  summary["sqrt_horizon_ratio"] = sqrt_ratio;
  summary["sublinear"] = sublinear;
  json per_t = json::array();
  for (std::size_t i = 0; i < horizons.size(); ++i)
    per_t.push_back({{"T", horizons[i]}, {"quantile_max_imbalance", stats[i]}});
  summary["horizons"] = per_t;
  ctx.write_json("summary.json", summary);

  return sublinear ? kExitOk : kExitBoundFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online vector balancing experiments"};
  app.require_subcommand(1);

  struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 1;
    int jobs = 1;
    std::string out_dir = "out";
  };
  std::map<std::string, CommonArgs> args;

  const std::vector<std::string> names = {"simulate",  "lowerbound", "tree-balance",
                                          "search-distribution", "verify", "orient"};
  const std::map<std::string, std::string> blurbs = {
      {"simulate", "replicated signer-vs-adversary runs with discrepancy reports"},
      {"lowerbound", "oblivious block adversary sweep over a horizon grid"},
      {"tree-balance", "one-dimensional tree balancing with body verification"},
      {"search-distribution", "exhaustive search for a certified sign distribution"},
      {"verify", "Monte Carlo and exact verification suites"},
      {"orient", "online edge orientation imbalance experiment"}};
  for (const auto& name : names) {
    auto* sub = app.add_subcommand(name, blurbs.at(name));
    auto& a = args[name];
    sub->add_option("--config", a.config_path, "flat key=value config file");
    sub->add_option("--set", a.overrides, "override: key=value (repeatable)");
    sub->add_option("--seed", a.seed, "master seed (default 1)");
    sub->add_option("--jobs", a.jobs, "worker threads (default 1)");
    sub->add_option("--out", a.out_dir, "output directory (default ./out)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const std::string chosen = app.get_subcommands().front()->get_name();
  const CommonArgs& a = args[chosen];

  RunContext ctx;
  ctx.subcommand = chosen;
  ctx.master_seed = a.seed;
  ctx.jobs = std::max(1, a.jobs);
  ctx.out_dir = a.out_dir;
  try {
    if (!a.config_path.empty()) ctx.config.load_file(a.config_path);
    ctx.config.apply_overrides(a.overrides);

    if (chosen == "simulate") return run_simulate(ctx);
    if (chosen == "lowerbound") return run_lowerbound(ctx);
    if (chosen == "tree-balance") return run_tree_balance(ctx);
    if (chosen == "search-distribution") return run_search(ctx);
    if (chosen == "verify") return run_verify(ctx);
    if (chosen == "orient") return run_orient(ctx);
    std::cerr << "unknown subcommand\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
