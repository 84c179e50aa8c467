// ginprod: real-eigenvalue statistics of products of real Ginibre matrices.
// Every command writes a machine-readable artifact (CSV with '#' metadata
// lines, or JSON with top-level {meta, data}) and echoes its parameters.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "ginprod/fredholm.hpp"
#include "ginprod/kernel.hpp"
#include "ginprod/montecarlo.hpp"
#include "ginprod/pfaffian.hpp"
#include "ginprod/special.hpp"
#include "ginprod/stats.hpp"
#include "json.hpp"

using namespace ginprod;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

using Cell = std::variant<double, long, std::string>;
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

std::string cell_str(const Cell& c) {
  if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
  char buf[40];
  if (std::holds_alternative<long>(c)) {
    std::snprintf(buf, sizeof buf, "%ld", std::get<long>(c));
  } else {
    const double v = std::get<double>(c);
    if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    std::snprintf(buf, sizeof buf, "%.17g", v);
  }
  return buf;
}

json cell_json(const Cell& c) {
  if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
  if (std::holds_alternative<long>(c)) return std::get<long>(c);
  const double v = std::get<double>(c);
  if (!std::isfinite(v)) return cell_str(c);  // sentinel string, no silent NaN
  return v;
}

struct Output {
  std::string command;
  std::map<std::string, std::string> params;  // echoed verbatim
  Table table;
  bool converged = true;
  double wall_seconds = 0;

  void write(const std::string& path, const std::string& format) const {
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!path.empty() && path != "-") {
      file.open(path);
      if (!file) throw std::runtime_error("cannot open output file: " + path);
      os = &file;
    }
    if (format == "json") {
      json meta{{"command", command},
                {"version", kVersion},
                {"converged", converged},
                {"wall_seconds", wall_seconds}};
      for (const auto& [k, v] : params) meta["params"][k] = v;
      json data = json::array();
      for (const auto& row : table.rows) {
        json r;
        for (size_t i = 0; i < table.columns.size(); ++i)
          r[table.columns[i]] = cell_json(row[i]);
        data.push_back(std::move(r));
      }
      *os << json{{"meta", meta}, {"data", data}}.dump(2) << "\n";
      return;
    }
    *os << "# command: " << command << "\n# version: " << kVersion << "\n";
    for (const auto& [k, v] : params) *os << "# " << k << ": " << v << "\n";
    *os << "# converged: " << (converged ? "true" : "false") << "\n";
    *os << "# wall_seconds: " << wall_seconds << "\n";
    for (size_t i = 0; i < table.columns.size(); ++i)
      *os << (i ? "," : "") << table.columns[i];
    *os << "\n";
    for (const auto& row : table.rows) {
      for (size_t i = 0; i < row.size(); ++i)
        *os << (i ? "," : "") << cell_str(row[i]);
      *os << "\n";
    }
  }
};

std::function<double(double)> named_function(const std::string& name) {
  if (name == "one") return [](double) { return 1.0; };
  if (name == "x") return [](double x) { return x; };
  if (name == "x2") return [](double x) { return x * x; };
  if (name == "gaussian")
    return [](double x) { return std::exp(-0.5 * x * x); };
  if (name == "bump")
    return [](double x) {
      return std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
    };
  throw CLI::ValidationError("--f", "unknown function name: " + name);
}

uint64_t resolve_seed(const std::string& seed_str) {
  if (seed_str == "auto") return std::random_device{}();
  return std::stoull(seed_str);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"real-eigenvalue statistics of products of real Ginibre "
               "matrices"};
  app.require_subcommand(1);

  // common options, registered per subcommand
  struct Common {
    int N = 100, m = 1, workers = 1, grid_order = 48, ell_max = 10;
    long trials = 1000;
    std::string seed = "12345";
    double epsilon = 0.1, tol = 1e-7;
    std::string out = "-", format = "csv";
  };
  std::map<std::string, Common> C;
  auto add_common = [&](CLI::App* sub, bool mc_opts, bool quad_opts) {
    Common& c = C[sub->get_name()];
    sub->add_option("--N", c.N, "matrix dimension (even)");
    sub->add_option("--m", c.m, "number of factors");
    sub->add_option("--output,-o", c.out, "output path ('-' = stdout)");
    sub->add_option("--format", c.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    if (mc_opts) {
      sub->add_option("--trials", c.trials, "Monte Carlo trials");
      sub->add_option("--seed", c.seed, "RNG seed or 'auto'");
      sub->add_option("--workers", c.workers, "worker threads")
          ->envname("GINPROD_WORKERS");
    }
    if (quad_opts) {
      sub->add_option("--grid-order", c.grid_order, "quadrature grid order");
      sub->add_option("--ell-max", c.ell_max, "series truncation order");
      sub->add_option("--tol", c.tol, "series tail tolerance");
    }
    return &c;
  };

  // kernel-eval
  auto* sc_kernel = app.add_subcommand(
      "kernel-eval", "tabulate kernel entries S/D/I on a grid");
  Common* ck = add_common(sc_kernel, false, false);
  std::string regime = "finite";
  double kx0 = 0.2, kx1 = 0.8, kstep = 0.1, ky = 0.5, kE = 0.5;
  sc_kernel->add_option("--regime", regime, "finite|bulk|edge|origin")
      ->check(CLI::IsMember({"finite", "bulk", "edge", "origin"}));
  sc_kernel->add_option("--x-min", kx0);
  sc_kernel->add_option("--x-max", kx1);
  sc_kernel->add_option("--step", kstep);
  sc_kernel->add_option("--y", ky, "fixed second argument");
  sc_kernel->add_option("--E", kE, "bulk energy (scaled regimes)");

  // density
  auto* sc_density =
      app.add_subcommand("density", "limiting density and finite-N diagonal");
  Common* cd = add_common(sc_density, false, false);
  double dx0 = 0.05, dx1 = 0.95, dstep = 0.05;
  bool d_finite = false;
  sc_density->add_option("--x-min", dx0);
  sc_density->add_option("--x-max", dx1);
  sc_density->add_option("--step", dstep);
  sc_density->add_flag("--finite", d_finite, "include S_N(x,x)");

  // expected-count
  auto* sc_count =
      app.add_subcommand("expected-count", "mean number of real eigenvalues");
  Common* cc = add_common(sc_count, false, false);
  double ca = 0, cb = 0;
  bool c_region = false;
  sc_count->add_option("--a", ca)->needs(sc_count->add_flag(
      "--region", c_region, "restrict to +/-[a,b] instead of the full line"));
  sc_count->add_option("--b", cb);

  // variance
  auto* sc_var = app.add_subcommand(
      "variance", "limiting + finite-N variance, optional Monte Carlo");
  Common* cv = add_common(sc_var, true, false);
  sc_var->add_option("--epsilon", cv->epsilon, "truncation exponent");
  int v_quad = 48;
  bool v_mc = false;
  sc_var->add_option("--quad-order", v_quad);
  sc_var->add_flag("--mc", v_mc, "add a Monte Carlo sample variance");

  // gap
  auto* sc_gap = app.add_subcommand("gap", "finite-N hole probability");
  Common* cg = add_common(sc_gap, false, true);
  double ga = 0.4, gb = 0.45;
  sc_gap->add_option("--a", ga)->required();
  sc_gap->add_option("--b", gb)->required();

  // edge-cdf
  auto* sc_edge =
      app.add_subcommand("edge-cdf", "limiting CDF of the largest real "
                         "eigenvalue (edge scaling)");
  Common* ce = add_common(sc_edge, false, true);
  double es0 = -6.0, es1 = 4.0, estep = 0.1;
  sc_edge->add_option("--s-min", es0);
  sc_edge->add_option("--s-max", es1);
  sc_edge->add_option("--step", estep);

  // origin-cdf
  auto* sc_origin = app.add_subcommand(
      "origin-cdf", "limiting law of the smallest positive eigenvalue");
  Common* co = add_common(sc_origin, false, true);
  double os0 = 0.1, os1 = 3.0, ostep = 0.1;
  bool o_sym = false;
  sc_origin->add_option("--s-min", os0);
  sc_origin->add_option("--s-max", os1);
  sc_origin->add_option("--step", ostep);
  sc_origin->add_flag("--symmetric", o_sym, "gap on [-s,s] instead of [0,s]");

  // mc
  auto* sc_mc = app.add_subcommand("mc", "raw ensemble run");
  Common* cm = add_common(sc_mc, true, false);

  // clt
  auto* sc_clt = app.add_subcommand("clt", "central-limit report");
  Common* cl = add_common(sc_clt, true, false);
  std::string clt_f = "one", clt_regime = "global";
  double clt_E = 0.5, clt_tau = 0.2;
  sc_clt->add_option("--f", clt_f, "one|x|x2|gaussian|bump");
  sc_clt->add_option("--regime", clt_regime,
                     "global|meso_bulk|meso_origin")
      ->check(CLI::IsMember({"global", "meso_bulk", "meso_origin"}));
  sc_clt->add_option("--E", clt_E);
  sc_clt->add_option("--tau", clt_tau);

  // asy-check
  auto* sc_asy = app.add_subcommand(
      "asy-check", "asymptotic-approximation error tables");
  Common* ca2 = add_common(sc_asy, false, false);

  // cluster
  auto* sc_cluster =
      app.add_subcommand("cluster", "normalized kernel decay vs separation");
  Common* cu = add_common(sc_cluster, false, false);
  double u_E = 0.5, u_max = 6.0, u_step = 1.0;
  sc_cluster->add_option("--E", u_E);
  sc_cluster->add_option("--sep-max", u_max);
  sc_cluster->add_option("--step", u_step);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 64;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();
  Common& cn = C[cmd];
  Output out;
  out.command = cmd;
  out.params["N"] = std::to_string(cn.N);
  out.params["m"] = std::to_string(cn.m);
  const auto t0 = std::chrono::steady_clock::now();

  try {
    if (cmd == "kernel-eval") {
      (void)ck;
      out.params["regime"] = regime;
      out.params["y"] = cell_str(ky);
      out.table.columns = {"x", "y", "s_xy", "s_yx", "d", "i"};
      std::optional<KernelContext> ctx;
      if (regime == "finite") ctx = make_context(cn.N, cn.m);
      WeightConfig wc;
      wc.m = cn.m;
      for (double x = kx0; x <= kx1 + 1e-12; x += kstep) {
        KernelSample2x2 k;
        if (regime == "finite")
          k = matrix_kernel(x, ky, *ctx);
        else if (regime == "bulk")
          k = bulk_limit_kernel(x, ky);
        else if (regime == "edge")
          k = edge_limit_kernel(x, ky);
        else
          k = origin_limit_kernel(x, ky, cn.m, wc);
        out.table.add({x, ky, k.s_xy, k.s_yx, k.d, k.i});
      }
    } else if (cmd == "density") {
      (void)cd;
      out.table.columns = {"x", "rho"};
      if (d_finite) out.table.columns.push_back("s_diag");
      std::optional<KernelContext> ctx;
      if (d_finite) ctx = make_context(cn.N, cn.m);
      for (double x = dx0; x <= dx1 + 1e-12; x += dstep) {
        std::vector<Cell> row{x, rho_density(x, cn.m)};
        if (d_finite) row.push_back(s_kernel(x, x, *ctx));
        out.table.add(std::move(row));
      }
    } else if (cmd == "expected-count") {
      (void)cc;
      KernelContext ctx = make_context(cn.N, cn.m);
      std::vector<std::pair<double, double>> region;
      if (c_region) {
        region = {{-cb, -ca}, {ca, cb}};
        out.params["a"] = cell_str(ca);
        out.params["b"] = cell_str(cb);
      }
      const double v = expected_count(ctx, region);
      const double asym = std::sqrt(2.0 * cn.N * cn.m / M_PI);
      out.table.columns = {"expected_count", "asymptotic", "ratio"};
      out.table.add({v, asym, v / asym});
    } else if (cmd == "variance") {
      KernelContext ctx = make_context(cn.N, cn.m);
      auto one = [](double) { return 1.0; };
      VariancePrediction p =
          variance_prediction({VarianceRegime::global}, one, cn.m);
      TruncationRegion region = truncation_region(cn.N, cn.m, cv->epsilon);
      const double fv = finite_N_variance(one, ctx, region, v_quad);
      out.params["epsilon"] = cell_str(cv->epsilon);
      out.table.columns = {"sigma2_limit", "finite_N_variance",
                           "finite_N_over_sqrtN"};
      std::vector<Cell> row{p.sigma2 * std::sqrt((double)cn.N * 1.0), fv,
                            fv / std::sqrt((double)cn.N)};
      // first column: the sqrt(N)-scaled limiting prediction
      if (v_mc) {
        out.params["trials"] = std::to_string(cn.trials);
        out.params["seed"] = cn.seed;
        EnsembleSpec spec{cn.N, cn.m, cn.trials, resolve_seed(cn.seed),
                          cn.workers};
        RunSummary rs =
            run_ensemble(spec, {obs_linear_region(region.lo, region.hi)});
        out.table.columns.push_back("mc_variance");
        out.table.columns.push_back("mc_variance_se");
        const ObservableSummary& o = rs.observables[0];
        row.push_back(o.variance);
        row.push_back(o.variance * std::sqrt(2.0 / (o.n - 1.0)));
      }
      out.table.add(std::move(row));
    } else if (cmd == "gap") {
      KernelContext ctx = make_context(cn.N, cn.m);
      GapProbResult r =
          finite_n_gap(ctx, ga, gb, cg->grid_order, cg->ell_max);
      out.params["a"] = cell_str(ga);
      out.params["b"] = cell_str(gb);
      out.table.columns = {"gap_probability", "tail_estimate", "ell_max"};
      out.table.add({r.value, r.tail_estimate, (long)r.ell_max});
      out.converged = r.converged;
    } else if (cmd == "edge-cdf") {
      out.table.columns = {"s", "cdf", "tail_estimate", "ell_max"};
      for (double s = es0; s <= es1 + 1e-12; s += estep) {
        GapProbResult r =
            edge_cdf(s, ce->grid_order, ce->tol, true, 16.0, ce->ell_max);
        out.table.add({s, r.value, r.tail_estimate, (long)r.ell_max});
        out.converged = out.converged && r.converged;
      }
    } else if (cmd == "origin-cdf") {
      out.table.columns = {"s", "survival", "cdf", "tail_estimate",
                           "ell_max"};
      for (double s = os0; s <= os1 + 1e-12; s += ostep) {
        GapProbResult r = origin_survival(s, cn.m, co->grid_order, co->tol,
                                          o_sym, co->ell_max);
        out.table.add(
            {s, r.value, 1.0 - r.value, r.tail_estimate, (long)r.ell_max});
        out.converged = out.converged && r.converged;
      }
    } else if (cmd == "mc") {
      out.params["trials"] = std::to_string(cn.trials);
      out.params["seed"] = cn.seed;
      out.params["workers"] = std::to_string(cn.workers);
      EnsembleSpec spec{cn.N, cn.m, cn.trials, resolve_seed(cn.seed),
                        cn.workers};
      RunSummary rs = run_ensemble(
          spec, {obs_count(), obs_lambda_max(), obs_lambda_min_positive()});
      out.params["failed_factorizations"] =
          std::to_string(rs.failed_factorizations);
      out.table.columns = {"observable", "n",        "excluded",
                           "mean",       "variance", "skewness",
                           "ex_kurtosis", "se_mean"};
      for (const ObservableSummary& o : rs.observables)
        out.table.add({o.name, o.n, o.excluded, o.mean, o.variance,
                       o.skewness, o.ex_kurtosis, o.se_mean});
      (void)cm;
    } else if (cmd == "clt") {
      out.params["trials"] = std::to_string(cn.trials);
      out.params["seed"] = cn.seed;
      out.params["f"] = clt_f;
      out.params["regime"] = clt_regime;
      VarianceRegime reg;
      if (clt_regime == "meso_bulk")
        reg = {VarianceRegime::meso_bulk, clt_E, clt_tau};
      else if (clt_regime == "meso_origin")
        reg = {VarianceRegime::meso_origin, 0.0, clt_tau};
      EnsembleSpec spec{cn.N, cn.m, cn.trials, resolve_seed(cn.seed),
                        cn.workers};
      CltReport r = clt_report(spec, named_function(clt_f), reg);
      out.table.columns = {"sigma2_predicted", "variance_ratio", "skewness",
                           "ex_kurtosis",      "ks_normal",      "pass"};
      out.table.add({r.prediction.sigma2, r.variance_ratio, r.skewness,
                     r.ex_kurtosis, r.ks_normal,
                     std::string(r.zero_variance ? "zero_variance"
                                 : r.pass        ? "true"
                                                 : "false")});
      (void)cl;
    } else if (cmd == "asy-check") {
      (void)ca2;
      KernelContext ctx = make_context(cn.N, cn.m);
      out.table.columns = {"check", "x", "exact", "approx", "rel_err"};
      for (double x : {0.2, 0.4, 0.6, 0.8}) {
        // bulk approximation of the one-point function vs the exact
        // diagonal kernel
        const double s_exact = s_kernel(x, x, ctx);
        const double s_asy = global_approx(x, x, ctx).s;
        out.table.add({std::string("global_s_diag"), x, s_exact, s_asy,
                       std::fabs(s_asy / s_exact - 1.0)});
      }
      for (double xi : {-2.0, 0.0, 2.0}) {
        const double x = 1.0 + xi / std::sqrt((double)cn.N * cn.m);
        const double exact = s_kernel(x, x, ctx);
        const double cc2 = std::sqrt((double)cn.N / cn.m);
        const double approx = cc2 * edge_limit_kernel(xi, xi).s_xy;
        out.table.add({std::string("edge_s_diag"), x, exact, approx,
                       std::fabs(approx / exact - 1.0)});
      }
    } else if (cmd == "cluster") {
      KernelContext ctx = make_context(cn.N, cn.m);
      std::vector<double> seps;
      for (double s = 0.0; s <= u_max + 1e-12; s += u_step) seps.push_back(s);
      ClusteringReport rep = clustering_report(ctx, u_E, seps);
      out.params["E"] = cell_str(u_E);
      out.params["fitted_rate"] = cell_str(rep.fitted_rate);
      out.table.columns = {"separation", "s_norm", "d_norm", "i_norm"};
      for (const ClusteringRow& r : rep.rows)
        out.table.add({r.separation, r.s_norm, r.d_norm, r.i_norm});
      (void)cu;
    }
  } catch (const PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }

  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  out.write(cn.out, cn.format);
  return out.converged ? 0 : 3;
}
