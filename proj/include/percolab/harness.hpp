#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "percolab/calibration.hpp"
#include "percolab/component_graphs.hpp"
#include "percolab/csv.hpp"
#include "percolab/limit_oracle.hpp"
#include "percolab/mmspace.hpp"
#include "percolab/multiplicative.hpp"
#include "percolab/percolation.hpp"
#include "percolab/stats.hpp"

// Experiment orchestration: configuration, seeded reproducibility, the
// two-sample machinery and the experiment registry behind the CLI.

namespace percolab::harness {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentConfig {
  std::string experiment;
  std::vector<int> m_list{10};
  std::vector<double> lambda_list{0.0};
  std::uint64_t base_seed = 1;
  std::size_t seed_count = 10;
  std::size_t budget = 20000;        // calibration probes
  std::size_t kappa_samples = 300;   // kappa oracle replicates
  std::string kappa_mode = "auto";   // "auto" or a numeric literal
  std::size_t n_perm = 2000;
  std::size_t top_k = 5;
  std::size_t points = 4;            // sampled distance matrix size
  std::size_t pairs = 50;            // metric-comparison pairs per seed
  std::size_t reps = 5;              // window-width repetitions
  int threads = 0;                   // 0 = hardware
  std::string out_dir = "out";
  std::vector<std::string> formats{"csv", "json"};

  std::uint64_t replicate_seed(std::uint64_t index) const {
    return rng::derive(base_seed, rng::kGeneric, index);
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

// Flat key = value per line; lists comma-separated; '#' comments.
inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) continue;
    if (key == "experiment") cfg.experiment = value;
    else if (key == "m") {
      cfg.m_list.clear();
      for (const auto& v : detail::split_list(value))
        cfg.m_list.push_back(std::stoi(v));
    } else if (key == "lambda") {
      cfg.lambda_list.clear();
      for (const auto& v : detail::split_list(value))
        cfg.lambda_list.push_back(std::stod(v));
    } else if (key == "seed") cfg.base_seed = std::stoull(value);
    else if (key == "seeds") cfg.seed_count = std::stoull(value);
    else if (key == "budget") cfg.budget = std::stoull(value);
    else if (key == "kappa_samples") cfg.kappa_samples = std::stoull(value);
    else if (key == "kappa") cfg.kappa_mode = value;
    else if (key == "n_perm") cfg.n_perm = std::stoull(value);
    else if (key == "top_k") cfg.top_k = std::stoull(value);
    else if (key == "points") cfg.points = std::stoull(value);
    else if (key == "pairs") cfg.pairs = std::stoull(value);
    else if (key == "reps") cfg.reps = std::stoull(value);
    else if (key == "threads") cfg.threads = std::stoi(value);
    else if (key == "out") cfg.out_dir = value;
    else if (key == "formats") cfg.formats = detail::split_list(value);
    else throw std::invalid_argument("unknown config key: " + key);
  }
  if (cfg.experiment.empty())
    throw std::invalid_argument("config must set experiment = <name>");
  return cfg;
}

inline std::string canonical_config_string(const ExperimentConfig& c) {
  std::ostringstream ss;
  ss.precision(17);
  ss << "experiment=" << c.experiment << ";m=";
  for (int m : c.m_list) ss << m << ",";
  ss << ";lambda=";
  for (double l : c.lambda_list) ss << l << ",";
  ss << ";seed=" << c.base_seed << ";seeds=" << c.seed_count
     << ";budget=" << c.budget << ";kappa_samples=" << c.kappa_samples
     << ";kappa=" << c.kappa_mode << ";n_perm=" << c.n_perm
     << ";top_k=" << c.top_k << ";points=" << c.points << ";pairs=" << c.pairs
     << ";reps=" << c.reps;
  return ss.str();
}

inline std::uint64_t config_hash(const ExperimentConfig& c) {
  // FNV-1a over the canonical string
  std::uint64_t h = 1469598103934665603ull;
  for (char ch : canonical_config_string(c)) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  return h;
}

// Deterministic fan-out: results land in slot `index` regardless of the
// thread that produced them.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& body) {
  if (threads <= 0)
    threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) break;
        body(i);
      }
    });
  for (auto& th : pool) th.join();
}

struct TwoSampleReport {
  std::string statistic_name;  // "ks" or "energy"
  std::size_t n_a = 0, n_b = 0;
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_perm = 0;
  double alpha = 0.01;
  bool rejected() const { return p_value <= alpha; }
};

inline TwoSampleReport ks_two_sample(const std::vector<double>& xs,
                                     const std::vector<double>& ys,
                                     std::size_t n_perm, std::uint64_t seed) {
  const auto t = stats::ks_permutation_test(xs, ys, n_perm, seed);
  TwoSampleReport r;
  r.statistic_name = "ks";
  r.n_a = xs.size();
  r.n_b = ys.size();
  r.statistic = t.statistic;
  r.p_value = t.p_value;
  r.n_perm = n_perm;
  return r;
}

// Energy-distance two-sample test on collections of k x k sampled distance
// matrices, vectorized over the upper triangle.
inline TwoSampleReport distance_matrix_test(
    const std::vector<std::vector<double>>& a,
    const std::vector<std::vector<double>>& b, std::size_t k,
    std::size_t n_perm, std::uint64_t seed) {
  auto upper = [&](const std::vector<double>& mat) {
    if (mat.size() != k * k)
      throw std::invalid_argument("distance_matrix_test: k mismatch");
    std::vector<double> v;
    v.reserve(k * (k - 1) / 2);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) v.push_back(mat[i * k + j]);
    return v;
  };
  std::vector<std::vector<double>> va, vb;
  va.reserve(a.size());
  vb.reserve(b.size());
  for (const auto& m : a) va.push_back(upper(m));
  for (const auto& m : b) vb.push_back(upper(m));
  const auto t = stats::energy_permutation_test(va, vb, n_perm, seed);
  TwoSampleReport r;
  r.statistic_name = "energy";
  r.n_a = a.size();
  r.n_b = b.size();
  r.statistic = t.statistic;
  r.p_value = t.p_value;
  r.n_perm = n_perm;
  return r;
}

inline TwoSampleReport energy_vector_test(
    const std::vector<std::vector<double>>& a,
    const std::vector<std::vector<double>>& b, std::size_t n_perm,
    std::uint64_t seed) {
  const auto t = stats::energy_permutation_test(a, b, n_perm, seed);
  TwoSampleReport r;
  r.statistic_name = "energy";
  r.n_a = a.size();
  r.n_b = b.size();
  r.statistic = t.statistic;
  r.p_value = t.p_value;
  r.n_perm = n_perm;
  return r;
}

// --- shared pipeline pieces ---

struct CalibratedWindow {
  calib::WindowParams window;
  calib::CalibrationResult calibration;
};

// kappa oracle (ER side by default, at n = V so the comparison scale and
// the calibration target agree), then p_c bisection and window derivation.
inline CalibratedWindow calibrate_for(const TransitiveGraph& g, double lambda,
                                      const ExperimentConfig& cfg,
                                      std::uint64_t seed) {
  double kappa, kappa_se = 0.0;
  if (cfg.kappa_mode == "auto") {
    const auto est = oracle::kappa_er(
        lambda, std::max<std::uint64_t>(g.vertex_count(), 1000),
        cfg.kappa_samples, rng::derive(seed, rng::kGeneric, 11));
    kappa = est.value;
    kappa_se = est.stderr_;
  } else {
    kappa = std::stod(cfg.kappa_mode);
  }
  CalibratedWindow out;
  out.calibration = calib::calibrate_pc(g, lambda, kappa, cfg.budget,
                                        rng::derive(seed, rng::kGeneric, 12));
  out.window = calib::derive_window(g, lambda, out.calibration.p_c_hat,
                                    cfg.budget,
                                    rng::derive(seed, rng::kGeneric, 13),
                                    kappa, kappa_se);
  out.window.p_c_hat_ci_lo = out.calibration.bracket_lo;
  out.window.p_c_hat_ci_hi = out.calibration.bracket_hi;
  return out;
}

inline nlohmann::json window_to_json(const calib::WindowParams& w) {
  nlohmann::json j;
  j["m"] = w.m;
  j["V"] = w.V;
  j["lambda"] = w.lambda;
  j["alpha_m"] = w.alpha_m;
  j["p_c_hat"] = w.p_c_hat;
  j["p_c_hat_ci"] = {w.p_c_hat_ci_lo, w.p_c_hat_ci_hi};
  j["p_s"] = w.p_s;
  j["M_s"] = w.M_s;
  j["chi_ps_hat"] = w.chi_ps_hat;
  j["chi_ps_hat_ci"] = {w.chi_ps_hat - 3.0 * w.chi_ps_hat_se,
                        w.chi_ps_hat + 3.0 * w.chi_ps_hat_se};
  j["q_lambda"] = w.q_lambda;
  j["p_c_prime"] = w.p_c_prime;
  j["kappa_hat"] = w.kappa_hat;
  j["kappa_hat_ci"] = {w.kappa_hat - 3.0 * w.kappa_hat_se,
                       w.kappa_hat + 3.0 * w.kappa_hat_se};
  return j;
}

inline void report_row(csv::Writer& w, const std::string& label,
                       const TwoSampleReport& r) {
  w.row({label, r.statistic_name, csv::num(r.n_a), csv::num(r.n_b),
         csv::num(r.statistic), csv::num(r.p_value), csv::num(r.n_perm),
         r.rejected() ? "reject" : "accept"});
}

// --- experiments ---

class ExperimentRun {
 public:
  explicit ExperimentRun(const ExperimentConfig& cfg) : cfg_(cfg) {
    std::filesystem::create_directories(cfg_.out_dir);
    started_ = std::chrono::steady_clock::now();
  }

  std::string path(const std::string& name) {
    files_.push_back(name);
    return cfg_.out_dir + "/" + name;
  }

  void add_report(const std::string& label, const TwoSampleReport& r) {
    nlohmann::json j;
    j["label"] = label;
    j["statistic"] = r.statistic_name;
    j["value"] = r.statistic;
    j["p_value"] = r.p_value;
    j["n_perm"] = r.n_perm;
    j["decision"] = r.rejected() ? "reject" : "accept";
    reports_.push_back(j);
  }

  void add_extra(const std::string& key, const nlohmann::json& j) {
    extra_[key] = j;
  }

  // Deterministic manifest; wall time goes to a separate file.
  void finish() {
    nlohmann::json manifest;
    manifest["experiment"] = cfg_.experiment;
    manifest["version"] = kVersion;
    manifest["config"] = canonical_config_string(cfg_);
    manifest["config_hash"] = config_hash(cfg_);
    manifest["base_seed"] = cfg_.base_seed;
    manifest["seed_count"] = cfg_.seed_count;
    manifest["files"] = files_;
    if (!reports_.empty()) manifest["reports"] = reports_;
    for (auto& [k, v] : extra_.items()) manifest[k] = v;
    std::ofstream mf(cfg_.out_dir + "/manifest.json", std::ios::binary);
    mf << manifest.dump(2) << "\n";
    const auto elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - started_)
                             .count();
    std::ofstream tf(cfg_.out_dir + "/timing.txt");
    tf << "wall_time_seconds " << elapsed << "\n";
  }

 private:
  ExperimentConfig cfg_;
  std::vector<std::string> files_;
  std::vector<nlohmann::json> reports_;
  nlohmann::json extra_ = nlohmann::json::object();
  std::chrono::steady_clock::time_point started_;
};

inline void run_sizes_vs_er(const ExperimentConfig& cfg, ExperimentRun& run) {
  csv::Writer sizes(run.path("sizes.csv"));
  std::vector<std::string> header{"side", "m", "lambda", "seed_index"};
  for (std::size_t i = 0; i < cfg.top_k; ++i)
    header.push_back("v" + std::to_string(i + 1));
  sizes.row(header);
  csv::Writer reports(run.path("reports.csv"));
  reports.row({"label", "statistic", "n_a", "n_b", "value", "p_value",
               "n_perm", "decision"});
  for (int m : cfg.m_list) {
    const auto g = TransitiveGraph::hypercube(m);
    for (double lambda : cfg.lambda_list) {
      const auto cw = calibrate_for(g, lambda, cfg, cfg.base_seed);
      run.add_extra("window_m" + std::to_string(m) + "_lambda" +
                        csv::num(lambda),
                    window_to_json(cw.window));
      std::vector<std::vector<double>> hc(cfg.seed_count), er(cfg.seed_count);
      parallel_for(cfg.seed_count, cfg.threads, [&](std::size_t i) {
        PercolationSample s(g, cfg.replicate_seed(2 * i));
        hc[i] = percolate(s, cw.window.p_c_hat).rescaled_sizes(cfg.top_k);
        er[i] = oracle::er_size_vector(g.vertex_count(), lambda,
                                       cfg.replicate_seed(2 * i + 1),
                                       cfg.top_k);
      });
      for (std::size_t i = 0; i < cfg.seed_count; ++i) {
        std::vector<std::string> row{"hypercube", csv::num(m),
                                     csv::num(lambda), csv::num(i)};
        for (double v : hc[i]) row.push_back(csv::num(v));
        sizes.row(row);
      }
      for (std::size_t i = 0; i < cfg.seed_count; ++i) {
        std::vector<std::string> row{"er", csv::num(m), csv::num(lambda),
                                     csv::num(i)};
        for (double v : er[i]) row.push_back(csv::num(v));
        sizes.row(row);
      }
      const auto rep = energy_vector_test(
          hc, er, cfg.n_perm, rng::derive(cfg.base_seed, rng::kGeneric, 99));
      const std::string label =
          "sizes m=" + std::to_string(m) + " lambda=" + csv::num(lambda);
      report_row(reports, label, rep);
      run.add_report(label, rep);
    }
  }
}

inline void run_sizes_vs_brownian(const ExperimentConfig& cfg,
                                  ExperimentRun& run) {
  csv::Writer sizes(run.path("sizes.csv"));
  std::vector<std::string> header{"side", "m", "lambda", "seed_index"};
  for (std::size_t i = 0; i < cfg.top_k; ++i)
    header.push_back("v" + std::to_string(i + 1));
  sizes.row(header);
  csv::Writer reports(run.path("reports.csv"));
  reports.row({"label", "statistic", "n_a", "n_b", "value", "p_value",
               "n_perm", "decision"});
  for (int m : cfg.m_list) {
    const auto g = TransitiveGraph::hypercube(m);
    for (double lambda : cfg.lambda_list) {
      const auto cw = calibrate_for(g, lambda, cfg, cfg.base_seed);
      std::vector<std::vector<double>> hc(cfg.seed_count), bm(cfg.seed_count);
      const double T = oracle::default_horizon(lambda);
      parallel_for(cfg.seed_count, cfg.threads, [&](std::size_t i) {
        PercolationSample s(g, cfg.replicate_seed(2 * i));
        hc[i] = percolate(s, cw.window.p_c_hat).rescaled_sizes(cfg.top_k);
        const auto exc = oracle::sample_excursions(
            lambda, T, 1e-4, cfg.replicate_seed(2 * i + 1));
        bm[i].assign(cfg.top_k, 0.0);
        for (std::size_t t = 0; t < cfg.top_k && t < exc.lengths.size(); ++t)
          bm[i][t] = exc.lengths[t];
      });
      for (std::size_t i = 0; i < cfg.seed_count; ++i) {
        std::vector<std::string> row{"hypercube", csv::num(m),
                                     csv::num(lambda), csv::num(i)};
        for (double v : hc[i]) row.push_back(csv::num(v));
        sizes.row(row);
      }
      for (std::size_t i = 0; i < cfg.seed_count; ++i) {
        std::vector<std::string> row{"brownian", csv::num(m), csv::num(lambda),
                                     csv::num(i)};
        for (double v : bm[i]) row.push_back(csv::num(v));
        sizes.row(row);
      }
      const auto rep = energy_vector_test(
          hc, bm, cfg.n_perm, rng::derive(cfg.base_seed, rng::kGeneric, 98));
      const std::string label =
          "sizes-brownian m=" + std::to_string(m) + " lambda=" + csv::num(lambda);
      report_row(reports, label, rep);
      run.add_report(label, rep);
    }
  }
}

inline void run_mult_vs_sprinkled(const ExperimentConfig& cfg,
                                  ExperimentRun& run) {
  csv::Writer out(run.path("coupling.csv"));
  out.row({"m", "lambda", "seed_index", "retained", "discrepancy_mass",
           "top_weight_mult", "top_weight_sprinkled"});
  csv::Writer reports(run.path("reports.csv"));
  reports.row({"label", "statistic", "n_a", "n_b", "value", "p_value",
               "n_perm", "decision"});
  for (int m : cfg.m_list) {
    const auto g = TransitiveGraph::hypercube(m);
    for (double lambda : cfg.lambda_list) {
      const auto cw = calibrate_for(g, lambda, cfg, cfg.base_seed);
      struct Row {
        std::size_t retained;
        double disc, top_mult, top_sprink;
      };
      std::vector<Row> rows(cfg.seed_count);
      std::vector<double> mult_top(cfg.seed_count), sprink_top(cfg.seed_count);
      parallel_for(cfg.seed_count, cfg.threads, [&](std::size_t i) {
        PercolationSample s(g, cfg.replicate_seed(3 * i));
        const auto wc = compgraph::extract_weighted_components(s, cw.window);
        const auto pair = compgraph::build_pair(wc, cw.window,
                                                cfg.replicate_seed(3 * i + 1));
        auto top_class_mass = [&](const std::vector<std::uint32_t>& part) {
          std::map<std::uint32_t, double> mass;
          for (std::size_t c = 0; c < wc.size(); ++c)
            mass[part[c]] += wc.weights[c];
          double top = 0.0;
          for (const auto& [k, v] : mass) top = std::max(top, v);
          return top;
        };
        rows[i] = {wc.size(), compgraph::discrepancy_mass(pair),
                   top_class_mass(pair.part_mult),
                   top_class_mass(pair.part_sprinkled)};
        mult_top[i] = rows[i].top_mult;
        sprink_top[i] = rows[i].top_sprink;
      });
      for (std::size_t i = 0; i < cfg.seed_count; ++i)
        out.row({csv::num(m), csv::num(lambda), csv::num(i),
                 csv::num(rows[i].retained), csv::num(rows[i].disc),
                 csv::num(rows[i].top_mult), csv::num(rows[i].top_sprink)});
      const auto rep = ks_two_sample(
          mult_top, sprink_top, cfg.n_perm,
          rng::derive(cfg.base_seed, rng::kGeneric, 97));
      const std::string label =
          "top-weight m=" + std::to_string(m) + " lambda=" + csv::num(lambda);
      report_row(reports, label, rep);
      run.add_report(label, rep);
    }
  }
}

// k x k sampled distance matrix of the largest component of H_p, graph
// metric scaled by V^{-1/3}, uniform measure on the vertices.
inline std::vector<double> largest_component_matrix(
    const PercolationSample& sample, double p, std::size_t k,
    std::uint64_t seed) {
  const Vertex V = sample.graph().vertex_count();
  UnionFind uf = sample.components(p);
  std::uint32_t nc = 0;
  const auto ids = uf.component_ids(&nc);
  std::vector<std::uint64_t> size(nc, 0);
  for (Vertex v = 0; v < V; ++v) ++size[ids[v]];
  const std::uint32_t top = static_cast<std::uint32_t>(
      std::max_element(size.begin(), size.end()) - size.begin());
  std::vector<Vertex> members;
  for (Vertex v = 0; v < V; ++v)
    if (ids[v] == top) members.push_back(v);
  const auto cs = mmspace::from_component(
      sample, p, members, std::pow(static_cast<double>(V), -1.0 / 3.0), 1.0);
  return mmspace::gp_distance_matrix(cs, k, seed);
}

// Same for the largest component of G(n, (1 + lambda n^{-1/3}) / n),
// metric scaled by n^{-1/3}.
inline std::vector<double> er_largest_component_matrix(std::uint64_t n,
                                                       double lambda,
                                                       std::size_t k,
                                                       std::uint64_t sample_seed,
                                                       std::uint64_t point_seed) {
  const double p = oracle::er_edge_probability(n, lambda);
  const auto edges = oracle::er_edges(n, p, sample_seed);
  UnionFind uf(n);
  for (const auto& [a, b] : edges) uf.unite(a, b);
  std::uint32_t nc = 0;
  const auto ids = uf.component_ids(&nc);
  std::vector<std::uint64_t> size(nc, 0);
  for (std::uint64_t v = 0; v < n; ++v) ++size[ids[v]];
  const std::uint32_t top = static_cast<std::uint32_t>(
      std::max_element(size.begin(), size.end()) - size.begin());
  std::vector<std::uint32_t> local(n, 0);
  mmspace::ComponentSpace cs;
  cs.distance_scale = std::pow(static_cast<double>(n), -1.0 / 3.0);
  std::uint32_t count = 0;
  for (std::uint64_t v = 0; v < n; ++v)
    if (ids[v] == top) local[v] = count++;
  cs.masses.assign(count, 1.0);
  cs.adj.assign(count, {});
  for (const auto& [a, b] : edges)
    if (ids[a] == top && ids[b] == top) {
      cs.adj[local[a]].push_back(local[b]);
      cs.adj[local[b]].push_back(local[a]);
    }
  return mmspace::gp_distance_matrix(cs, k, point_seed);
}

inline void run_metric_comparison(const ExperimentConfig& cfg,
                                  ExperimentRun& run) {
  csv::Writer out(run.path("metric.csv"));
  out.row({"m", "lambda", "seed_index", "pair_index", "d_box_scaled",
           "d_comp_scaled", "in_vstar", "comp_finite"});
  csv::Writer reports(run.path("reports.csv"));
  reports.row({"label", "statistic", "n_a", "n_b", "value", "p_value",
               "n_perm", "decision"});
  for (int m : cfg.m_list) {
    const auto g = TransitiveGraph::hypercube(m);
    for (double lambda : cfg.lambda_list) {
      const auto cw = calibrate_for(g, lambda, cfg, cfg.base_seed);
      std::vector<std::vector<compgraph::MetricComparisonRow>> rows(
          cfg.seed_count);
      std::vector<std::vector<double>> hc_mats(cfg.seed_count),
          er_mats(cfg.seed_count);
      parallel_for(cfg.seed_count, cfg.threads, [&](std::size_t i) {
        PercolationSample s(g, cfg.replicate_seed(4 * i));
        const auto wc = compgraph::extract_weighted_components(s, cw.window);
        const auto pair =
            compgraph::build_pair(wc, cw.window, cfg.replicate_seed(4 * i + 1),
                                  compgraph::BuildMode::kFromCoupling);
        rows[i] = compgraph::metric_comparison(s, cw.window, wc, pair, 1,
                                               cfg.pairs,
                                               cfg.replicate_seed(4 * i + 2));
        // sampled distance matrices of M_1 on both sides
        hc_mats[i] = largest_component_matrix(
            s, cw.window.p_c_hat, cfg.points, cfg.replicate_seed(4 * i + 3));
        er_mats[i] = er_largest_component_matrix(
            g.vertex_count(), lambda, cfg.points, cfg.replicate_seed(4 * i + 1),
            cfg.replicate_seed(4 * i + 3));
      });
      for (std::size_t i = 0; i < cfg.seed_count; ++i)
        for (std::size_t t = 0; t < rows[i].size(); ++t)
          out.row({csv::num(m), csv::num(lambda), csv::num(i), csv::num(t),
                   csv::num(rows[i][t].d_box_scaled),
                   csv::num(rows[i][t].d_comp_scaled),
                   rows[i][t].in_vstar ? "1" : "0",
                   rows[i][t].comp_finite ? "1" : "0"});
      const auto rep = distance_matrix_test(
          hc_mats, er_mats, cfg.points, cfg.n_perm,
          rng::derive(cfg.base_seed, rng::kGeneric, 96));
      const std::string label =
          "gp-matrix m=" + std::to_string(m) + " lambda=" + csv::num(lambda);
      report_row(reports, label, rep);
      run.add_report(label, rep);
    }
  }
}

inline void run_window_width(const ExperimentConfig& cfg, ExperimentRun& run) {
  if (cfg.lambda_list.size() < 2)
    throw std::invalid_argument("window-width needs two lambda values");
  const double l1 = cfg.lambda_list[0], l2 = cfg.lambda_list[1];
  csv::Writer out(run.path("window_width.csv"));
  out.row({"m", "rep", "lambda1", "lambda2", "ratio", "ratio_se",
           "p_c_lo", "p_c_hi"});
  for (int m : cfg.m_list) {
    const auto g = TransitiveGraph::hypercube(m);
    const auto k1 = oracle::kappa_er(
        l1, std::max<std::uint64_t>(g.vertex_count(), 1000), cfg.kappa_samples,
        rng::derive(cfg.base_seed, rng::kGeneric, 21));
    const auto k2 = oracle::kappa_er(
        l2, std::max<std::uint64_t>(g.vertex_count(), 1000), cfg.kappa_samples,
        rng::derive(cfg.base_seed, rng::kGeneric, 22));
    for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
      const auto res = calib::window_width_check(
          g, l1, k1.value, l2, k2.value, cfg.budget,
          cfg.replicate_seed(1000 + rep + static_cast<std::size_t>(m) * 131));
      out.row({csv::num(m), csv::num(rep), csv::num(l1), csv::num(l2),
               csv::num(res.ratio), csv::num(res.ratio_se),
               csv::num(res.cal_lo.p_c_hat), csv::num(res.cal_hi.p_c_hat)});
    }
  }
}

inline void run_tightness_scan(const ExperimentConfig& cfg,
                               ExperimentRun& run) {
  csv::Writer out(run.path("tightness.csv"));
  out.row({"m", "lambda", "seed_index", "epsilon", "long_thin_count",
           "scanned"});
  csv::Writer tails(run.path("l4_tails.csv"));
  tails.row({"m", "lambda", "seed_index", "k", "size_tail", "diam_tail"});
  const std::vector<double> eps_grid{0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
  const std::vector<std::size_t> k_grid{1, 2, 5, 10};
  for (int m : cfg.m_list) {
    const auto g = TransitiveGraph::hypercube(m);
    for (double lambda : cfg.lambda_list) {
      const auto cw = calibrate_for(g, lambda, cfg, cfg.base_seed);
      const double V = static_cast<double>(g.vertex_count());
      const double delta = 0.25;
      const int R = std::max(1, static_cast<int>(delta * std::cbrt(V)));
      struct SeedOut {
        std::vector<std::uint64_t> counts;
        std::uint64_t scanned;
        std::vector<std::pair<double, double>> tails;
      };
      std::vector<SeedOut> outs(cfg.seed_count);
      parallel_for(cfg.seed_count, cfg.threads, [&](std::size_t i) {
        PercolationSample s(g, cfg.replicate_seed(i));
        for (double eps : eps_grid) {
          const std::uint64_t M = std::max<std::uint64_t>(
              1, static_cast<std::uint64_t>(eps * std::pow(delta, 2.5) *
                                            std::pow(V, 2.0 / 3.0)));
          const auto scan = long_thin_scan(s, cw.window.p_c_hat, R, M);
          outs[i].counts.push_back(scan.count);
          outs[i].scanned = scan.scanned;
        }
        const auto st = percolate(s, cw.window.p_c_hat, true);
        for (std::size_t k : k_grid)
          outs[i].tails.push_back(tail_and_l4_stats(st, k));
      });
      for (std::size_t i = 0; i < cfg.seed_count; ++i) {
        for (std::size_t e = 0; e < eps_grid.size(); ++e)
          out.row({csv::num(m), csv::num(lambda), csv::num(i),
                   csv::num(eps_grid[e]), csv::num(outs[i].counts[e]),
                   csv::num(outs[i].scanned)});
        for (std::size_t t = 0; t < k_grid.size(); ++t)
          tails.row({csv::num(m), csv::num(lambda), csv::num(i),
                     csv::num(k_grid[t]), csv::num(outs[i].tails[t].first),
                     csv::num(outs[i].tails[t].second)});
      }
    }
  }
}

inline void run_conditions_report(const ExperimentConfig& cfg,
                                  ExperimentRun& run) {
  csv::Writer out(run.path("conditions.csv"));
  out.row({"m", "lambda", "seed_index", "retained", "sigma3_over_sigma2_cubed",
           "q_minus_inv_sigma2", "max_w_over_sigma2", "max_w_over_sigma2_pow",
           "sigma2_pow_over_min_w"});
  for (int m : cfg.m_list) {
    const auto g = TransitiveGraph::hypercube(m);
    for (double lambda : cfg.lambda_list) {
      const auto cw = calibrate_for(g, lambda, cfg, cfg.base_seed);
      std::vector<mult::ConditionReport> reps(cfg.seed_count);
      std::vector<std::size_t> counts(cfg.seed_count);
      parallel_for(cfg.seed_count, cfg.threads, [&](std::size_t i) {
        PercolationSample s(g, cfg.replicate_seed(i));
        const auto wc = compgraph::extract_weighted_components(s, cw.window);
        counts[i] = wc.size();
        if (wc.size() == 0) return;
        mult::WeightVector wv(wc.weights, cw.window.q_lambda);
        reps[i] = mult::check_conditions(wv);
      });
      for (std::size_t i = 0; i < cfg.seed_count; ++i)
        out.row({csv::num(m), csv::num(lambda), csv::num(i),
                 csv::num(counts[i]),
                 csv::num(reps[i].sigma3_over_sigma2_cubed),
                 csv::num(reps[i].q_minus_inv_sigma2),
                 csv::num(reps[i].max_w_over_sigma2),
                 csv::num(reps[i].max_w_over_sigma2_pow),
                 csv::num(reps[i].sigma2_pow_over_min_w)});
    }
  }
}

inline void run_experiment(const ExperimentConfig& cfg) {
  ExperimentRun run(cfg);
  if (cfg.experiment == "noop") {
    // manifest only
  } else if (cfg.experiment == "sizes-vs-er") {
    run_sizes_vs_er(cfg, run);
  } else if (cfg.experiment == "sizes-vs-brownian") {
    run_sizes_vs_brownian(cfg, run);
  } else if (cfg.experiment == "mult-vs-sprinkled") {
    run_mult_vs_sprinkled(cfg, run);
  } else if (cfg.experiment == "metric-comparison") {
    run_metric_comparison(cfg, run);
  } else if (cfg.experiment == "window-width") {
    run_window_width(cfg, run);
  } else if (cfg.experiment == "tightness-scan") {
    run_tightness_scan(cfg, run);
  } else if (cfg.experiment == "conditions-report") {
    run_conditions_report(cfg, run);
  } else {
    throw std::invalid_argument("unknown experiment: " + cfg.experiment);
  }
  run.finish();
}

}  // namespace percolab::harness
