#include "srl/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "srl/forms.hpp"
#include "srl/norms.hpp"
#include "srl/potential.hpp"
#include "srl/spectral.hpp"
#include "srl/sublevel.hpp"
#include "srl/verify.hpp"

namespace srl {

namespace {

using nlohmann::ordered_json;

struct Common {
  std::string structure = "heisenberg";
  std::uint64_t seed = 0;
  std::string output;
  std::string format = "json";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--structure", c.structure, "builtin name (heisenberg) or path to a structure JSON file")
      ->capture_default_str();
  cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
  cmd->add_option("--output", c.output, "output file (default: stdout)");
  cmd->add_option("--format", c.format, "output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
}

std::string num(double v) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::setprecision(17) << v;
  return s.str();
}

// Rows of a CSV table. Cells are preformatted strings.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::string json_scalar_text(const ordered_json& v) {
  if (v.is_number_float()) return num(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string render(const Common& c, const ordered_json& config, const ordered_json& result, const Table& table) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  if (c.format == "json") {
    ordered_json doc;
    doc["config"] = config;
    for (auto it = result.begin(); it != result.end(); ++it) doc[it.key()] = it.value();
    out << doc.dump(2) << "\n";
    return out.str();
  }
  for (auto it = config.begin(); it != config.end(); ++it) out << "# " << it.key() << "=" << json_scalar_text(it.value()) << "\n";
  for (auto it = result.begin(); it != result.end(); ++it)
    if (!it.value().is_array() && !it.value().is_object())
      out << "# " << it.key() << "=" << json_scalar_text(it.value()) << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

void emit(const Common& c, const std::string& text, std::ostream& out) {
  if (c.output.empty()) {
    out << text;
    return;
  }
  std::ofstream file(c.output, std::ios::binary);
  if (!file) throw std::invalid_argument("cannot open output file " + c.output);
  file << text;
}

ordered_json base_config(const std::string& command, const Common& c, const MetivierStructure& s) {
  ordered_json cfg;
  cfg["command"] = command;
  cfg["structure"] = c.structure;
  cfg["n"] = s.n();
  cfg["m"] = s.m();
  cfg["h_type"] = s.h_type();
  cfg["seed"] = c.seed;
  return cfg;
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
}

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical experiments for Schrodinger-type weighted sub-Laplacians on two-step groups", "srl"};
  app.require_subcommand(1);

  Common c_verify, c_potential, c_gamma, c_weyl, c_spectrum, c_thinness;

  auto* verify = app.add_subcommand("verify", "run the randomized invariant suite");
  add_common(verify, c_verify);
  std::int64_t verify_points = 10000;
  verify->add_option("--points", verify_points, "random points per check")->capture_default_str();

  auto* potential = app.add_subcommand("potential", "potential constants, lower bounds and admissibility");
  add_common(potential, c_potential);
  double pot_alpha = 3.0;
  int pot_radii = 25, pot_directions = 8;
  potential->add_option("--alpha", pot_alpha, "weight exponent")->capture_default_str();
  potential->add_option("--radii", pot_radii, "log-spaced radii in [1e-2, 1e2]")->capture_default_str();
  potential->add_option("--directions", pot_directions, "random directions per radius")->capture_default_str();

  auto* gamma = app.add_subcommand("gamma", "empirical pseudo-triangle constant of the Kaplan norm");
  add_common(gamma, c_gamma);
  std::int64_t gamma_samples = 100000;
  gamma->add_option("--samples", gamma_samples, "sampled pairs")->capture_default_str();

  auto* weyl = app.add_subcommand("weyl", "Weyl quasi-mode residuals along central translates");
  add_common(weyl, c_weyl);
  double weyl_alpha = 2.0;
  int weyl_n_max = 64, weyl_n_min = 2, weyl_grid = 32;
  std::string weyl_lambda = "auto";
  double weyl_xr = 0.0, weyl_tr = 0.0;
  weyl->add_option("--alpha", weyl_alpha, "weight exponent")->capture_default_str();
  weyl->add_option("--n-max", weyl_n_max, "largest translation index")->capture_default_str();
  weyl->add_option("--n-min", weyl_n_min, "smallest translation index")->capture_default_str();
  weyl->add_option("--lambda", weyl_lambda, "spectral shift, or auto")->capture_default_str();
  weyl->add_option("--grid", weyl_grid, "quadrature points per axis")->capture_default_str();
  weyl->add_option("--x-radius", weyl_xr, "bump radius in x (default 1, or 3 when alpha > 2)");
  weyl->add_option("--t-radius", weyl_tr, "bump radius in t (default 1, or 2 when alpha > 2)");

  auto* spectrum = app.add_subcommand("spectrum", "lowest Dirichlet eigenvalues of L + V on a box");
  add_common(spectrum, c_spectrum);
  double sp_alpha = 3.0, sp_tol = 1e-8;
  BoxGrid box;
  int sp_k = 5, sp_block = 2;
  std::int64_t sp_max_iter = 200000;
  spectrum->add_option("--alpha", sp_alpha, "weight exponent")->capture_default_str();
  spectrum->add_option("--lx", box.lx, "horizontal half-width")->capture_default_str();
  spectrum->add_option("--lt", box.lt, "central half-width")->capture_default_str();
  spectrum->add_option("--nx", box.nx, "points per horizontal axis")->capture_default_str();
  spectrum->add_option("--nt", box.nt, "points per central axis")->capture_default_str();
  spectrum->add_option("--k", sp_k, "number of eigenvalues")->capture_default_str();
  spectrum->add_option("--tol", sp_tol, "residual tolerance")->capture_default_str();
  spectrum->add_option("--max-iter", sp_max_iter, "matrix-vector product budget")->capture_default_str();
  spectrum->add_option("--block", sp_block, "Lanczos block size")->capture_default_str();

  auto* thinness = app.add_subcommand("thinness", "Monte-Carlo thinness integral of a sublevel set");
  add_common(thinness, c_thinness);
  double th_alpha = 3.0, th_M = 10.0, th_r = 1.0, th_ell = 2.0, th_T = 64.0;
  std::int64_t th_outer = 10000, th_inner = 1000;
  thinness->add_option("--alpha", th_alpha, "weight exponent")->capture_default_str();
  thinness->add_option("--m-level", th_M, "sublevel M")->capture_default_str();
  thinness->add_option("--r", th_r, "ball radius")->capture_default_str();
  thinness->add_option("--ell", th_ell, "exponent ell")->capture_default_str();
  thinness->add_option("--truncation", th_T, "truncation |t| <= T")->capture_default_str();
  thinness->add_option("--outer", th_outer, "outer samples")->capture_default_str();
  thinness->add_option("--inner", th_inner, "inner samples per outer point")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 64;
  }

  try {
    if (*verify) {
      const Common& c = c_verify;
      const MetivierStructure s = load_structure(c.structure);
      auto cfg = base_config("verify", c, s);
      cfg["points"] = verify_points;
      const auto checks = run_invariant_suite(s, verify_points, c.seed);
      bool all = true;
      ordered_json list = ordered_json::array();
      Table table{{"check", "passed", "worst", "tolerance", "samples"}, {}};
      for (const auto& r : checks) {
        all = all && r.passed;
        list.push_back({{"check", r.name}, {"passed", r.passed}, {"worst", r.worst}, {"tolerance", r.tolerance},
                        {"samples", r.samples}});
        table.rows.push_back({r.name, r.passed ? "true" : "false", num(r.worst), num(r.tolerance),
                              std::to_string(r.samples)});
      }
      ordered_json res;
      res["all_passed"] = all;
      res["checks"] = list;
      emit(c, render(c, cfg, res, table), out);
      return all ? 0 : 1;
    }

    if (*potential) {
      const Common& c = c_potential;
      require_alpha(pot_alpha);
      const MetivierStructure s = load_structure(c.structure);
      auto cfg = base_config("potential", c, s);
      cfg["alpha"] = pot_alpha;
      cfg["radii"] = pot_radii;
      cfg["directions"] = pot_directions;
      const ConditionEstimate est = condition_from_singular_values(s, 4096, c.seed);
      const PotentialConstants k = potential_bounds(pot_alpha, est, s);
      const auto cloud = graded_cloud(s, 1e-2, 1e2, pot_radii, pot_directions, c.seed);
      const InfEstimate inf = essential_inf_estimate(pot_alpha, s, cloud, est);
      const SandwichReport sandwich = check_sandwich(k, s, cloud);
      const AdmissibilityReport adm = admissibility_report(pot_alpha, s, 256, c.seed);

      ordered_json res;
      res["c0"] = k.c0;
      res["C0"] = k.C0;
      res["c_a1"] = k.c_a1;
      res["c_a2"] = k.c_a2;
      res["c_a3"] = k.c_a3;
      res["c_a4"] = k.c_a4;
      res["analytic_floor"] = number_or_null(inf.analytic_floor);
      res["sampled_min"] = inf.sampled_min;
      res["unbounded_below"] = inf.unbounded_below;
      res["sandwich_violations"] = sandwich.violations.size();
      res["condition_a"] = adm.condition_a;
      res["condition_b"] = adm.condition_b;
      Table table{{"index", "N", "abs_x", "V", "lower", "upper"}, {}};
      ordered_json points = ordered_json::array();
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        const double N = kaplan_norm(s, cloud[i]);
        const double V = potential_value(pot_alpha, s, cloud[i]);
        const auto b = sandwich_bounds(k, s, cloud[i]);
        table.rows.push_back({std::to_string(i), num(N), num(cloud[i].x.norm()), num(V), num(b.lower), num(b.upper)});
        points.push_back({{"N", N}, {"abs_x", cloud[i].x.norm()}, {"V", V}, {"lower", b.lower}, {"upper", b.upper}});
      }
      res["points"] = points;
      emit(c, render(c, cfg, res, table), out);
      return 0;
    }

    if (*gamma) {
      const Common& c = c_gamma;
      const MetivierStructure s = load_structure(c.structure);
      auto cfg = base_config("gamma", c, s);
      cfg["samples"] = gamma_samples;
      const GammaEstimate g = estimate_gamma(s, gamma_samples, c.seed);
      ordered_json res;
      res["gamma_hat"] = g.gamma_hat;
      Table table{{"samples", "gamma_hat"}, {{std::to_string(g.samples), num(g.gamma_hat)}}};
      emit(c, render(c, cfg, res, table), out);
      return 0;
    }

    if (*weyl) {
      const Common& c = c_weyl;
      require_alpha(weyl_alpha);
      if (weyl_n_min < 2 || weyl_n_max < weyl_n_min) throw std::invalid_argument("need 2 <= n-min <= n-max");
      if (weyl_grid < 2) throw std::invalid_argument("grid needs at least 2 points per axis");
      const MetivierStructure s = load_structure(c.structure);
      const double xr = weyl_xr > 0.0 ? weyl_xr : (weyl_alpha > 2.0 ? 3.0 : 1.0);
      const double tr = weyl_tr > 0.0 ? weyl_tr : (weyl_alpha > 2.0 ? 2.0 : 1.0);
      double lambda = std::numeric_limits<double>::quiet_NaN();
      if (weyl_lambda != "auto") {
        std::size_t used = 0;
        lambda = std::stod(weyl_lambda, &used);
        if (used != weyl_lambda.size()) throw std::invalid_argument("--lambda must be a number or auto");
      }
      std::vector<int> indices;
      for (int n = weyl_n_min; n <= weyl_n_max; ++n) indices.push_back(n);
      const WeylStudy study = weyl_study(weyl_alpha, s, SmoothBump(s, xr, tr), indices, lambda, weyl_grid, c.seed);

      auto cfg = base_config("weyl", c, s);
      cfg["alpha"] = weyl_alpha;
      cfg["n_min"] = weyl_n_min;
      cfg["n_max"] = weyl_n_max;
      cfg["lambda"] = study.lambda;
      cfg["lambda_source"] = weyl_lambda == "auto" ? "auto" : "user";
      cfg["grid"] = weyl_grid;
      cfg["x_radius"] = xr;
      cfg["t_radius"] = tr;
      ordered_json res;
      res["potential_sup"] = study.potential_sup;
      res["psi_norm"] = study.psi_norm;
      res["sub_laplacian_norm"] = study.sub_laplacian_norm;
      res["bound"] = study.bound;
      ordered_json records = ordered_json::array();
      Table table{{"n", "residual", "bound", "psi_norm"}, {}};
      for (const auto& r : study.records) {
        table.rows.push_back({std::to_string(r.n_index), num(r.residual), num(study.bound), num(r.psi_norm)});
        records.push_back({{"n", r.n_index}, {"residual", r.residual}, {"bound", study.bound},
                           {"psi_norm", r.psi_norm}, {"overlap_index", r.overlap_index},
                           {"overlap_check", r.overlap_check}});
      }
      res["records"] = records;
      emit(c, render(c, cfg, res, table), out);
      return 0;
    }

    if (*spectrum) {
      const Common& c = c_spectrum;
      require_alpha(sp_alpha);
      const MetivierStructure s = load_structure(c.structure);
      box.validate();
      const AssembledOperator op = assemble_operator(sp_alpha, s, box);
      SpectrumResult r = lanczos_lowest(op.matrix, sp_k, sp_tol, sp_max_iter, c.seed, {sp_block, 0});
      r.grid = box.describe();

      auto cfg = base_config("spectrum", c, s);
      cfg["alpha"] = sp_alpha;
      cfg["lx"] = box.lx;
      cfg["lt"] = box.lt;
      cfg["nx"] = box.nx;
      cfg["nt"] = box.nt;
      cfg["k"] = sp_k;
      cfg["tol"] = sp_tol;
      cfg["max_iter"] = sp_max_iter;
      cfg["block"] = sp_block;
      ordered_json res;
      res["grid"] = {{"lx", box.lx}, {"lt", box.lt}, {"nx", box.nx}, {"nt", box.nt}, {"hx", box.hx()},
                     {"ht", box.ht()}, {"dimension", op.matrix.dimension()}};
      res["converged"] = r.converged;
      res["iterations"] = r.iterations;
      res["eigenvalues"] = r.eigenvalues;
      res["residuals"] = r.residuals;
      Table table{{"index", "eigenvalue", "residual"}, {}};
      for (std::size_t i = 0; i < r.eigenvalues.size(); ++i)
        table.rows.push_back({std::to_string(i), num(r.eigenvalues[i]), num(r.residuals[i])});
      emit(c, render(c, cfg, res, table), out);
      if (!r.converged) {
        err << "spectrum: Lanczos did not converge within " << sp_max_iter << " matrix-vector products\n";
        return 2;
      }
      return 0;
    }

    if (*thinness) {
      const Common& c = c_thinness;
      require_alpha(th_alpha);
      const MetivierStructure s = load_structure(c.structure);
      const ThinnessEstimate e =
          thinness_integral({th_alpha, th_M}, s, th_r, th_ell, th_T, th_outer, th_inner, c.seed);
      auto cfg = base_config("thinness", c, s);
      cfg["alpha"] = th_alpha;
      cfg["m_level"] = th_M;
      cfg["r"] = th_r;
      cfg["ell"] = th_ell;
      cfg["truncation"] = th_T;
      cfg["outer"] = th_outer;
      cfg["inner"] = th_inner;
      ordered_json res;
      res["value"] = e.value;
      res["std_error"] = e.std_error;
      res["tail_bound"] = number_or_null(e.tail_bound);
      res["divergent"] = e.divergent;
      res["cylinder_c"] = e.cylinder_c;
      res["threshold_k"] = e.threshold_k;
      res["ell_threshold"] = static_cast<double>(s.m()) / (s.n() * (th_alpha - 2.0));
      Table table{{"ell", "r", "value", "std_error", "tail_bound", "divergent"},
                  {{num(e.ell), num(e.r), num(e.value), num(e.std_error), num(e.tail_bound),
                    e.divergent ? "true" : "false"}}};
      emit(c, render(c, cfg, res, table), out);
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 64;
}

}  // namespace srl
