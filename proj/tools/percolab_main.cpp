// percolab: desk-scale critical percolation laboratory CLI.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "percolab/percolab.hpp"

using namespace percolab;

namespace {

std::vector<double> parse_weights(const std::string& spec, double lambda) {
  // "er:N" gives N weights N^{-2/3} (the Erdos-Renyi embedding);
  // "const:N:W" gives N equal weights; anything else is a file with one
  // weight per line.
  if (spec.rfind("er:", 0) == 0) {
    const std::uint64_t n = std::stoull(spec.substr(3));
    (void)lambda;
    return std::vector<double>(
        n, std::pow(static_cast<double>(n), -2.0 / 3.0));
  }
  if (spec.rfind("const:", 0) == 0) {
    const auto rest = spec.substr(6);
    const auto colon = rest.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("const spec is const:N:W");
    const std::uint64_t n = std::stoull(rest.substr(0, colon));
    const double w = std::stod(rest.substr(colon + 1));
    return std::vector<double>(n, w);
  }
  std::ifstream in(spec);
  if (!in) throw std::invalid_argument("cannot open weight file " + spec);
  std::vector<double> out;
  double w;
  while (in >> w) out.push_back(w);
  return out;
}

std::vector<std::size_t> parse_index_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoull(item));
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

harness::CalibratedWindow calibrate_simple(const TransitiveGraph& g,
                                           double lambda,
                                           const std::string& kappa_mode,
                                           std::size_t budget,
                                           std::size_t kappa_samples,
                                           std::uint64_t seed) {
  harness::ExperimentConfig cfg;
  cfg.experiment = "cli";
  cfg.kappa_mode = kappa_mode;
  cfg.budget = budget;
  cfg.kappa_samples = kappa_samples;
  return harness::calibrate_for(g, lambda, cfg, seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"percolab: critical hypercube percolation laboratory"};
  app.set_help_flag("--help", "print help");  // frees -h / --h for step sizes
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "global base seed");

  // --- nbrw ---
  auto* nbrw_cmd = app.add_subcommand("nbrw", "NBRW mixing diagnostics");
  int nb_m = 10, nb_t = 0, nb_tmax = 0;
  double nb_xi = 0.0;
  std::string nb_out = "nbrw.csv";
  nbrw_cmd->add_option("--m", nb_m, "hypercube dimension")->required();
  nbrw_cmd->add_option("--t", nb_t, "single step count to print");
  nbrw_cmd->add_option("--xi", nb_xi, "uniform mixing tolerance");
  nbrw_cmd->add_option("--tmax", nb_tmax, "step bound");
  nbrw_cmd->add_option("--out", nb_out, "output csv");

  // --- percolate ---
  auto* perc_cmd = app.add_subcommand("percolate", "component statistics");
  int pc_m = 10;
  double pc_p = -1.0, pc_lambda = 0.0;
  bool pc_use_lambda = false;
  std::size_t pc_seeds = 10;
  std::string pc_stats = "sizes", pc_out = "percolate.csv";
  std::string pc_kappa = "auto";
  std::size_t pc_budget = 20000, pc_ksamp = 200;
  perc_cmd->add_option("--m", pc_m)->required();
  perc_cmd->add_option("--p", pc_p, "edge probability");
  perc_cmd->add_option("--lambda", pc_lambda, "window position (calibrates)");
  perc_cmd->add_flag("--use-lambda", pc_use_lambda,
                     "calibrate p from --lambda");
  perc_cmd->add_option("--seeds", pc_seeds);
  perc_cmd->add_option("--stats", pc_stats, "sizes|diam|l4");
  perc_cmd->add_option("--kappa", pc_kappa);
  perc_cmd->add_option("--budget", pc_budget);
  perc_cmd->add_option("--kappa-samples", pc_ksamp);
  perc_cmd->add_option("--out", pc_out);

  // --- oracle ---
  auto* or_cmd = app.add_subcommand("oracle", "limit object samplers");
  or_cmd->set_help_flag("--help", "print help");
  double or_lambda = 0.0, or_T = 0.0, or_h = 1e-4;
  std::string or_mode = "brownian", or_out = "oracle.csv";
  std::uint64_t or_n = 100000;
  std::size_t or_samples = 100;
  or_cmd->add_option("--lambda", or_lambda);
  or_cmd->add_option("--mode", or_mode, "brownian|er");
  or_cmd->add_option("--n", or_n, "ER vertex count");
  or_cmd->add_option("--T", or_T, "horizon (0 = default)");
  or_cmd->add_option("--h", or_h, "grid step");
  or_cmd->add_option("--samples", or_samples);
  or_cmd->add_option("--out", or_out);

  // --- calibrate ---
  auto* cal_cmd = app.add_subcommand("calibrate", "window parameters");
  int cal_m = 10;
  double cal_lambda = 0.0;
  std::string cal_kappa = "auto", cal_json = "window.json";
  std::size_t cal_budget = 20000, cal_ksamp = 300;
  cal_cmd->add_option("--m", cal_m)->required();
  cal_cmd->add_option("--lambda", cal_lambda);
  cal_cmd->add_option("--kappa", cal_kappa, "value or 'auto'");
  cal_cmd->add_option("--budget", cal_budget);
  cal_cmd->add_option("--kappa-samples", cal_ksamp);
  cal_cmd->add_option("--json", cal_json, "output path");

  // --- multgraph ---
  auto* mg_cmd = app.add_subcommand("multgraph", "multiplicative graphs");
  std::string mg_weights = "er:1000", mg_mode = "direct",
              mg_out = "multgraph.csv";
  double mg_q = 1.0;
  std::size_t mg_samples = 100;
  mg_cmd->add_option("--weights", mg_weights, "er:N | const:N:W | file");
  mg_cmd->add_option("--q", mg_q);
  mg_cmd->add_option("--mode", mg_mode, "direct|exploration");
  mg_cmd->add_option("--samples", mg_samples);
  mg_cmd->add_option("--out", mg_out);

  // --- compgraph ---
  auto* cg_cmd = app.add_subcommand("compgraph", "component graph pipeline");
  int cg_m = 12;
  double cg_lambda = 0.0, cg_tau = 0.1;
  std::size_t cg_seeds = 10, cg_budget = 20000, cg_ksamp = 200, cg_nmc = 100,
              cg_pairs = 50;
  std::string cg_emit = "discrepancy", cg_out = "compgraph.csv",
              cg_kappa = "auto";
  cg_cmd->add_option("--m", cg_m)->required();
  cg_cmd->add_option("--lambda", cg_lambda);
  cg_cmd->add_option("--seeds", cg_seeds);
  cg_cmd->add_option("--emit", cg_emit,
                     "deltas|discrepancy|matrices|metric|girth|badpairs");
  cg_cmd->add_option("--tau", cg_tau, "girth weight floor");
  cg_cmd->add_option("--nmc", cg_nmc, "matrix Monte Carlo realizations");
  cg_cmd->add_option("--pairs", cg_pairs, "metric comparison pairs");
  cg_cmd->add_option("--kappa", cg_kappa);
  cg_cmd->add_option("--budget", cg_budget);
  cg_cmd->add_option("--kappa-samples", cg_ksamp);
  cg_cmd->add_option("--out", cg_out);

  // --- mmspace ---
  auto* mm_cmd = app.add_subcommand("mmspace", "metric measure space ops");
  std::string mm_in, mm_in2, mm_op = "gp-matrix", mm_out = "mmspace.csv";
  std::string mm_set_a, mm_set_b, mm_mu, mm_nu;
  std::size_t mm_points = 4;
  mm_cmd->add_option("--in", mm_in, "space file")->required();
  mm_cmd->add_option("--in2", mm_in2, "second space file (ghp)");
  mm_cmd->add_option("--op", mm_op, "hausdorff|prokhorov|gp-matrix|ghp");
  mm_cmd->add_option("--points", mm_points);
  mm_cmd->add_option("--set-a", mm_set_a, "indices for hausdorff");
  mm_cmd->add_option("--set-b", mm_set_b, "indices for hausdorff");
  mm_cmd->add_option("--mu", mm_mu, "masses for prokhorov (default: file)");
  mm_cmd->add_option("--nu", mm_nu, "masses for prokhorov");
  mm_cmd->add_option("--out", mm_out);

  // --- experiment ---
  auto* ex_cmd = app.add_subcommand("experiment", "run a named experiment");
  std::string ex_name, ex_config;
  std::string ex_out;
  ex_cmd->add_option("name", ex_name,
                     "sizes-vs-er|sizes-vs-brownian|mult-vs-sprinkled|"
                     "metric-comparison|window-width|tightness-scan|"
                     "conditions-report|noop");
  ex_cmd->add_option("--config", ex_config, "flat key = value config file");
  ex_cmd->add_option("--out", ex_out, "output directory override");

  CLI11_PARSE(app, argc, argv);

  try {
    if (nbrw_cmd->parsed()) {
      const auto g = TransitiveGraph::hypercube(nb_m);
      const double V = static_cast<double>(g.vertex_count());
      if (nb_xi <= 0.0) nb_xi = calib::default_alpha(nb_m);
      if (nb_tmax <= 0)
        nb_tmax = static_cast<int>(10.0 * nb_m * std::log(nb_m)) + 1;
      csv::Writer out(nb_out);
      out.row({"t", "max_violation", "mixed"});
      const auto binom = nbrw::binomial_table(nb_m);
      const auto prof =
          nbrw::HypercubeReducedKernel(nb_m).profiles(nb_tmax + 1);
      for (int t = 1; t <= nb_tmax; ++t) {
        double worst = 0.0;
        for (int k = 0; k <= nb_m; ++k)
          worst = std::max(
              worst, 0.5 * (prof[t][k] + prof[t + 1][k]) / binom[nb_m][k]);
        out.row({csv::num(t), csv::num(worst * V),
                 worst * V <= 1.0 + nb_xi ? "1" : "0"});
      }
      if (nb_t > 0) {
        const auto d = nbrw::nbrw_distribution(g, 0, nb_t);
        std::cout << "p^" << nb_t << "(0, z) has " << d.size()
                  << " support points\n";
      }
      std::cout << "T_mix(" << nb_xi
                << ") = " << nbrw::mixing_time(g, nb_xi, nb_tmax) << "\n";
    } else if (perc_cmd->parsed()) {
      const auto g = TransitiveGraph::hypercube(pc_m);
      double p = pc_p;
      if (pc_use_lambda || pc_p < 0.0) {
        const auto cw = calibrate_simple(g, pc_lambda, pc_kappa, pc_budget,
                                         pc_ksamp, seed);
        p = cw.window.p_c_hat;
        std::cout << "calibrated p_c_hat = " << p << "\n";
      }
      const bool with_diam = pc_stats != "sizes";
      csv::Writer out(pc_out);
      out.row(with_diam ? std::vector<std::string>{"seed", "rank", "size",
                                                   "diameter", "exact"}
                        : std::vector<std::string>{"seed", "rank", "size"});
      for (std::size_t i = 0; i < pc_seeds; ++i) {
        PercolationSample s(g, rng::derive(seed, rng::kGeneric, i));
        const auto st = percolate(s, p, with_diam);
        for (std::size_t r = 0; r < st.sizes.size(); ++r) {
          if (with_diam)
            out.row({csv::num(i), csv::num(r + 1), csv::num(st.sizes[r]),
                     csv::num(st.diameters[r]),
                     st.exact_diameter[r] ? "1" : "0"});
          else
            out.row({csv::num(i), csv::num(r + 1), csv::num(st.sizes[r])});
        }
        if (pc_stats == "l4") {
          const auto [s4, d4] = tail_and_l4_stats(st, 2);
          std::cout << "seed " << i << " l4 tails: sizes " << s4 << " diam "
                    << d4 << "\n";
        }
      }
    } else if (or_cmd->parsed()) {
      csv::Writer out(or_out);
      if (or_mode == "brownian") {
        if (or_T <= 0.0) or_T = oracle::default_horizon(or_lambda);
        out.row({"sample", "rank", "length"});
        double sum_sq = 0.0;
        for (std::size_t i = 0; i < or_samples; ++i) {
          const auto exc = oracle::sample_excursions(
              or_lambda, or_T, or_h, rng::derive(seed, rng::kSampling, i));
          sum_sq += exc.sum_sq;
          for (std::size_t r = 0; r < std::min<std::size_t>(5, exc.lengths.size());
               ++r)
            out.row({csv::num(i), csv::num(r + 1), csv::num(exc.lengths[r])});
        }
        std::cout << "kappa_hat(brownian) ~ "
                  << sum_sq / static_cast<double>(or_samples) << "\n";
      } else if (or_mode == "er") {
        out.row({"sample", "rank", "rescaled_size"});
        for (std::size_t i = 0; i < or_samples; ++i) {
          const auto v = oracle::er_size_vector(
              or_n, or_lambda, rng::derive(seed, rng::kSampling, i), 5);
          for (std::size_t r = 0; r < v.size(); ++r)
            out.row({csv::num(i), csv::num(r + 1), csv::num(v[r])});
        }
        const auto k = oracle::kappa_er(or_lambda, or_n, or_samples,
                                        rng::derive(seed, rng::kGeneric, 7));
        std::cout << "kappa_hat(er) = " << k.value << " +- " << k.stderr_
                  << "\n";
      } else {
        throw std::invalid_argument("oracle mode must be brownian|er");
      }
    } else if (cal_cmd->parsed()) {
      const auto g = TransitiveGraph::hypercube(cal_m);
      const auto cw = calibrate_simple(g, cal_lambda, cal_kappa, cal_budget,
                                       cal_ksamp, seed);
      std::ofstream jf(cal_json, std::ios::binary);
      jf << harness::window_to_json(cw.window).dump(2) << "\n";
      std::cout << "p_c_hat = " << cw.window.p_c_hat
                << (cw.calibration.ambiguous ? " (ambiguous)" : "") << "\n";
    } else if (mg_cmd->parsed()) {
      const auto weights = parse_weights(mg_weights, 0.0);
      mult::WeightVector wv(weights, mg_q);
      csv::Writer out(mg_out);
      out.row({"sample", "rank", "weight", "local_time"});
      for (std::size_t i = 0; i < mg_samples; ++i) {
        const auto s = rng::derive(seed, rng::kSampling, i);
        if (mg_mode == "direct") {
          const auto part = mult::sample_direct(wv, s);
          for (std::size_t r = 0;
               r < std::min<std::size_t>(5, part.weights.size()); ++r)
            out.row({csv::num(i), csv::num(r + 1), csv::num(part.weights[r]),
                     ""});
        } else if (mg_mode == "exploration") {
          const auto tr = mult::sample_exploration(wv, s);
          for (std::size_t r = 0;
               r < std::min<std::size_t>(5, tr.partition.weights.size()); ++r)
            out.row({csv::num(i), csv::num(r + 1),
                     csv::num(tr.partition.weights[r]),
                     csv::num(tr.local_times[r])});
        } else {
          throw std::invalid_argument("multgraph mode must be direct|exploration");
        }
      }
    } else if (cg_cmd->parsed()) {
      const auto g = TransitiveGraph::hypercube(cg_m);
      const auto cw = calibrate_simple(g, cg_lambda, cg_kappa, cg_budget,
                                       cg_ksamp, seed);
      csv::Writer out(cg_out);
      if (cg_emit == "discrepancy") {
        out.row({"seed", "retained", "discrepancy_mass"});
        for (std::size_t i = 0; i < cg_seeds; ++i) {
          PercolationSample s(g, rng::derive(seed, rng::kGeneric, 2 * i));
          const auto wc = compgraph::extract_weighted_components(s, cw.window);
          const auto pair = compgraph::build_pair(
              wc, cw.window, rng::derive(seed, rng::kGeneric, 2 * i + 1));
          out.row({csv::num(i), csv::num(wc.size()),
                   csv::num(compgraph::discrepancy_mass(pair))});
        }
      } else if (cg_emit == "deltas") {
        out.row({"seed", "a", "b", "delta", "mean_field"});
        for (std::size_t i = 0; i < cg_seeds; ++i) {
          PercolationSample s(g, rng::derive(seed, rng::kGeneric, i));
          const auto wc = compgraph::extract_weighted_components(s, cw.window);
          const double V = static_cast<double>(g.vertex_count());
          const std::size_t top = std::min<std::size_t>(wc.size(), 8);
          for (std::uint32_t a = 0; a < top; ++a)
            for (std::uint32_t b = a + 1; b < top; ++b)
              out.row({csv::num(i), csv::num(a), csv::num(b),
                       csv::num(compgraph::delta_AB(wc, a, b)),
                       csv::num(static_cast<double>(g.degree()) *
                                static_cast<double>(wc.sizes[a]) *
                                static_cast<double>(wc.sizes[b]) / V)});
        }
      } else if (cg_emit == "matrices") {
        out.row({"seed", "retained", "norm_t_mult", "norm_t_sprinkled",
                 "norm_xi", "norm_t_disagree"});
        for (std::size_t i = 0; i < cg_seeds; ++i) {
          PercolationSample s(g, rng::derive(seed, rng::kGeneric, 2 * i));
          auto wc = compgraph::extract_weighted_components(s, cw.window);
          if (wc.size() > 2000) wc = compgraph::restrict_to_top(wc, 2000);
          const auto mats = compgraph::connection_matrices(
              wc, cw.window, cg_nmc, rng::derive(seed, rng::kGeneric, 2 * i + 1));
          out.row({csv::num(i), csv::num(wc.size()),
                   csv::num(mats.t_mult.frobenius()),
                   csv::num(mats.t_sprinkled.frobenius()),
                   csv::num(mats.xi.frobenius()),
                   csv::num(mats.t_disagree.frobenius())});
        }
      } else if (cg_emit == "metric") {
        out.row({"seed", "pair", "d_box_scaled", "d_comp_scaled", "in_vstar",
                 "comp_finite"});
        for (std::size_t i = 0; i < cg_seeds; ++i) {
          PercolationSample s(g, rng::derive(seed, rng::kGeneric, 3 * i));
          const auto wc = compgraph::extract_weighted_components(s, cw.window);
          const auto pair = compgraph::build_pair(
              wc, cw.window, rng::derive(seed, rng::kGeneric, 3 * i + 1),
              compgraph::BuildMode::kFromCoupling);
          const auto rows = compgraph::metric_comparison(
              s, cw.window, wc, pair, 1, cg_pairs,
              rng::derive(seed, rng::kGeneric, 3 * i + 2));
          for (std::size_t t = 0; t < rows.size(); ++t)
            out.row({csv::num(i), csv::num(t), csv::num(rows[t].d_box_scaled),
                     csv::num(rows[t].d_comp_scaled),
                     rows[t].in_vstar ? "1" : "0",
                     rows[t].comp_finite ? "1" : "0"});
        }
      } else if (cg_emit == "girth") {
        out.row({"seed", "girth_hops", "girth_scaled"});
        for (std::size_t i = 0; i < cg_seeds; ++i) {
          PercolationSample s(g, rng::derive(seed, rng::kGeneric, i));
          const auto wc = compgraph::extract_weighted_components(s, cw.window);
          const double girth = compgraph::girth_scan(wc, cw.window, cg_tau);
          const double scaled =
              girth * cw.window.chi_ps_hat /
              std::cbrt(static_cast<double>(g.vertex_count()));
          out.row({csv::num(i), csv::num(girth), csv::num(scaled)});
        }
      } else if (cg_emit == "badpairs") {
        out.row({"seed", "n_over_v43"});
        for (std::size_t i = 0; i < cg_seeds; ++i) {
          PercolationSample s(g, rng::derive(seed, rng::kGeneric, i));
          const auto wc = compgraph::extract_weighted_components(s, cw.window);
          out.row({csv::num(i),
                   csv::num(compgraph::bad_pair_count(s, cw.window, wc,
                                                      cw.window.p_c_prime))});
        }
      } else {
        throw std::invalid_argument("unknown --emit " + cg_emit);
      }
    } else if (mm_cmd->parsed()) {
      std::ifstream in(mm_in);
      if (!in) throw std::invalid_argument("cannot open " + mm_in);
      const auto space = mmspace::read_space(in);
      csv::Writer out(mm_out);
      if (mm_op == "hausdorff") {
        const double h = mmspace::hausdorff(space, parse_index_list(mm_set_a),
                                            parse_index_list(mm_set_b));
        out.row({"hausdorff", csv::num(h)});
        std::cout << "hausdorff = " << h << "\n";
      } else if (mm_op == "prokhorov") {
        const auto mu = mm_mu.empty() ? space.masses : parse_double_list(mm_mu);
        const auto nu = parse_double_list(mm_nu);
        const double p = mmspace::prokhorov(space, mu, nu);
        out.row({"prokhorov", csv::num(p)});
        std::cout << "prokhorov = " << p << "\n";
      } else if (mm_op == "gp-matrix") {
        const auto mat = mmspace::gp_distance_matrix(space, mm_points, seed);
        for (std::size_t i = 0; i < mm_points; ++i) {
          std::vector<std::string> row;
          for (std::size_t j = 0; j < mm_points; ++j)
            row.push_back(csv::num(mat[i * mm_points + j]));
          out.row(row);
        }
      } else if (mm_op == "ghp") {
        std::ifstream in2(mm_in2);
        if (!in2) throw std::invalid_argument("cannot open " + mm_in2);
        const auto other = mmspace::read_space(in2);
        const double d = mmspace::ghp_bruteforce(space, other);
        out.row({"ghp", csv::num(d)});
        std::cout << "ghp = " << d << "\n";
      } else {
        throw std::invalid_argument("unknown --op " + mm_op);
      }
    } else if (ex_cmd->parsed()) {
      harness::ExperimentConfig cfg;
      if (!ex_config.empty()) {
        std::ifstream in(ex_config);
        if (!in) throw std::invalid_argument("cannot open " + ex_config);
        cfg = harness::parse_config(in);
      }
      if (!ex_name.empty()) cfg.experiment = ex_name;
      if (app.count("--seed")) cfg.base_seed = seed;
      if (!ex_out.empty()) cfg.out_dir = ex_out;
      harness::run_experiment(cfg);
      std::cout << "wrote " << cfg.out_dir << "/manifest.json\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
