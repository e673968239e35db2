// Command-line front end: load a spec, run one scenario, write result.json,
// result.csv and plot-ready curves/*.csv into the output directory.
//
// Exit codes (stable contract):
//   0  certified success
//   1  usage error
//   2  run completed but some finding is uncertified
//   3  I/O error (spec unreadable, output not writable)
//   4  spec validation failure
//   5  scenario/domain error

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hetlab/scenarios.hpp"

namespace fs = std::filesystem;
using hetlab::json;

namespace {

int g_threads = 1;

std::string fmt(double x) { return json(x).dump(); }

struct LongRange {
  long lo = 0, hi = 0;
};

LongRange parse_range(const std::string& s) {
  const auto pos = s.find("..");
  if (pos == std::string::npos)
    throw CLI::ValidationError("range", "expected a..b, got " + s);
  LongRange r;
  r.lo = std::stol(s.substr(0, pos));
  r.hi = std::stol(s.substr(pos + 2));
  if (r.hi < r.lo)
    throw CLI::ValidationError("range", "empty range " + s);
  return r;
}

struct DoubleRange {
  double lo = 0, hi = 0;
};

DoubleRange parse_window(const std::string& s) {
  const auto pos = s.find("..");
  if (pos == std::string::npos)
    throw CLI::ValidationError("window", "expected lo..hi, got " + s);
  DoubleRange r;
  r.lo = std::stod(s.substr(0, pos));
  r.hi = std::stod(s.substr(pos + 2));
  if (!(r.hi >= r.lo))
    throw CLI::ValidationError("window", "empty window " + s);
  return r;
}

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& p, const std::string& body) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << body;
  if (!out) throw IoError("short write on " + p.string());
}

void write_result(const fs::path& dir, const hetlab::ScanResult& res,
                  const std::string& csv) {
  fs::create_directories(dir / "curves");
  write_text(dir / "result.json", res.to_json().dump(2) + "\n");
  write_text(dir / "result.csv", csv);
}

void dump_curve(const fs::path& p, const hetlab::PlanarCurve& curve) {
  std::string body = "t,x,y,dx,dy\n";
  for (double t : curve.samples()) {
    const hetlab::CurveJet j = curve.at(t);
    body += fmt(t) + "," + fmt(j.p.x) + "," + fmt(j.p.y) + "," +
            fmt(j.d1.x) + "," + fmt(j.d1.y) + "\n";
  }
  write_text(p, body);
}

int exit_for(const hetlab::ScanResult& res) { return res.certified ? 0 : 2; }

std::string census_csv(const hetlab::ScanResult& res) {
  std::string csv = "branch,count,phase_span,predicted_count\n";
  for (const auto& b : res.outputs.at("branches")) {
    csv += b.value("branch", b.value("side", std::string("?"))) + "," +
           std::to_string(b.value("count", 0)) + "," +
           fmt(b.value("phase_span", 0.0)) + "," +
           fmt(b.value("predicted_count", 0.0)) + "\n";
  }
  return csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hetlab: saddle-center return-map laboratory"};
  app.require_subcommand(1);

  if (const char* env = std::getenv("HETLAB_THREADS")) {
    g_threads = std::max(1, std::atoi(env));
    (void)g_threads;
  }

  std::string spec_path;
  std::string out_dir = ".";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("SPEC_PATH", spec_path, "system spec JSON file")
        ->required();
    cmd->add_option("--out", out_dir, "output directory");
  };

  auto* c_validate = app.add_subcommand("validate", "validate a spec");
  add_common(c_validate);

  auto* c_census = app.add_subcommand("census", "homoclinic census");
  add_common(c_census);
  bool v0 = false;
  double level_c = 0.0, tau_min = 1e-6, tau_max = 1e-2;
  c_census->add_flag("--v0", v0, "census on the critical level c = 0");
  auto* level_opt =
      c_census->add_option("--level", level_c, "energy level c (c < 0)");
  c_census->add_option("--tau-min", tau_min, "inner tau cutoff");
  c_census->add_option("--tau-max", tau_max, "outer tau cutoff");

  auto* c_tan = app.add_subcommand("tangencies", "tangency sequences");
  add_common(c_tan);
  std::string side;
  int count = 4;
  std::string n_range_s;
  double c_start = 0.0, case2_c = 1e-4;
  c_tan->add_option("--side", side, "neg | pos | case2")->required();
  c_tan->add_option("--count", count, "sequence length (side neg)");
  c_tan->add_option("--n-range", n_range_s, "preimage index range (side pos)");
  c_tan->add_option("--c-start", c_start, "scan start level (side neg)");
  c_tan->add_option("--c", case2_c, "level for the case-2 census");

  auto* c_web = app.add_subcommand("web", "heteroclinic web at c > 0");
  add_common(c_web);
  double web_c = 1e-4;
  c_web->add_option("--c", web_c, "energy level")->required();

  auto* c_loops = app.add_subcommand("loops", "saddle-center loop parameters");
  add_common(c_loops);
  std::string loops_range_s = "3..8";
  c_loops->add_option("--n-range", loops_range_s, "round counts a..b");

  auto* c_ell = app.add_subcommand("elliptic", "elliptic-point search");
  add_common(c_ell);
  std::string c_window_s, k_range_s;
  int c_grid = 400;
  c_ell->add_option("--c-window", c_window_s, "level window lo..hi")
      ->required();
  c_ell->add_option("--k-range", k_range_s, "strip index range a..b")
      ->required();
  c_ell->add_option("--c-grid", c_grid, "grid resolution");

  CLI11_PARSE(app, argc, argv);

  hetlab::SystemSpec spec;
  try {
    spec = hetlab::load_spec(spec_path);
  } catch (const hetlab::SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }

  hetlab::ValidationReport report;
  try {
    report = hetlab::validate_spec(spec);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  if (!report.pass) {
    std::cerr << "spec validation failed:\n";
    for (const auto& m : report.violations) std::cerr << "  " << m << "\n";
    if (!c_validate->parsed()) return 4;
  }

  const fs::path dir(out_dir);
  try {
    if (c_validate->parsed()) {
      hetlab::ScanResult res;
      res.scenario = "validate";
      res.digest = hetlab::spec_digest(spec);
      res.inputs = {{"spec_path", spec_path}};
      res.outputs = {{"pass", report.pass},
                     {"c_max", report.c_max},
                     {"zeta_max", report.zeta_max},
                     {"k0", report.k0},
                     {"violations", report.violations}};
      res.certified = report.pass;
      std::string csv = "check,value\npass," +
                        std::string(report.pass ? "1" : "0") + "\nc_max," +
                        fmt(report.c_max) + "\nk0," +
                        std::to_string(report.k0) + "\n";
      write_result(dir, res, csv);
      std::cout << (report.pass ? "spec OK" : "spec INVALID")
                << "  c_max=" << report.c_max << "  k0=" << report.k0 << "\n";
      return report.pass ? 0 : 4;
    }

    if (c_census->parsed()) {
      hetlab::ScanResult res;
      if (v0 || level_opt->count() == 0)
        res = hetlab::census_v0_case1(spec, tau_min, tau_max);
      else
        res = hetlab::census_c_negative(spec, level_c, tau_min, tau_max);
      write_result(dir, res, census_csv(res));
      const double c_used = v0 ? 0.0 : level_c;
      for (int sign = 0; sign < 2; ++sign) {
        const double lo = sign == 0 ? tau_min : -tau_max;
        const double hi = sign == 0 ? tau_max : -tau_min;
        const auto tr = hetlab::unstable_trace_spiral(spec, c_used, lo, hi);
        if (!tr.empty())
          dump_curve(dir / "curves" /
                         (sign == 0 ? "branch_plus.csv" : "branch_minus.csv"),
                     *tr.curve);
      }
      return exit_for(res);
    }

    if (c_tan->parsed()) {
      hetlab::ScanResult res;
      std::string csv;
      if (side == "neg") {
        double start = c_start;
        if (start == 0.0) start = -report.c_max;
        res = hetlab::tangency_sequence_negative(spec, start, count);
        csv = "n,c_nose,c_double_root,agree,certified\n";
        for (const auto& e : res.outputs.at("sequence")) {
          csv += std::to_string(e.value("n", 0)) + "," +
                 fmt(e.value("c_nose", 0.0)) + "," +
                 fmt(e.value("c_double_root", 0.0)) + "," +
                 (e.value("detectors_agree", false) ? "1" : "0") + "," +
                 (e.value("quadratic_certified", false) ? "1" : "0") + "\n";
        }
        const double c0 = res.outputs["sequence"].empty()
                              ? -report.c_max
                              : res.outputs["sequence"][0]
                                    .value("c_nose", -report.c_max);
        dump_curve(dir / "curves" / "nose_spiral.csv",
                   hetlab::detail::nose_window_spiral(spec, c0));
      } else if (side == "pos") {
        LongRange nr{1, 4};
        if (!n_range_s.empty()) nr = parse_range(n_range_s);
        res = hetlab::tangency_sequence_positive(spec, nr.lo, nr.hi);
        csv = "n,c_n,certified\n";
        for (const auto& e : res.outputs.at("sequence")) {
          if (!e.contains("c_n")) continue;
          csv += std::to_string(e.value("n", 0)) + "," +
                 fmt(e.value("c_n", 0.0)) + "," +
                 (e.value("certified", false) ? "1" : "0") + "\n";
        }
        for (const auto& e : res.outputs.at("sequence")) {
          if (!e.contains("c_n")) continue;
          const auto ell = hetlab::circle_image(
              spec, e.at("c_n").get<double>(),
              hetlab::CircleImage::sigma_u_to_sigma);
          dump_curve(dir / "curves" / "tangency_ellipse.csv", ell.curve());
          break;
        }
      } else if (side == "case2") {
        res = hetlab::census_case2_positive(spec, case2_c);
        csv = "quantity,value\ncount," +
              std::to_string(res.outputs.value("count", 0)) + "\nphase_span," +
              fmt(res.outputs.value("phase_span", 0.0)) + "\n";
        if (case2_c > 0.0) {
          const double eta_c = hetlab::lyapunov_eta(spec, case2_c);
          const auto cut =
              hetlab::detail::segment_circle_cut(spec, case2_c, eta_c);
          const auto tr = hetlab::unstable_trace_spiral(
              spec, case2_c, cut.first + spec.tau_floor,
              cut.second - spec.tau_floor);
          if (!tr.empty())
            dump_curve(dir / "curves" / "double_spiral.csv", *tr.curve);
        }
      } else {
        std::cerr << "error: --side must be neg, pos or case2\n";
        return 1;
      }
      write_result(dir, res, csv);
      return exit_for(res);
    }

    if (c_web->parsed()) {
      const auto res = hetlab::heteroclinic_web_positive(spec, web_c);
      std::string csv = "quantity,value\ncount_u0," +
                        std::to_string(res.outputs["heteroclinic"]
                                           .value("count_u0", 0)) +
                        "\ncount_v0," +
                        std::to_string(res.outputs["heteroclinic"]
                                           .value("count_v0", 0)) +
                        "\nspiral_total," +
                        std::to_string(res.outputs["spiral_census"]
                                           .value("total_count", 0)) +
                        "\nn0," +
                        std::to_string(res.outputs["lambda_lemma"]
                                           .value("n0", -1)) +
                        "\n";
      write_result(dir, res, csv);
      dump_curve(dir / "curves" / "ellipse_sigma.csv",
                 hetlab::circle_image(spec, web_c,
                                      hetlab::CircleImage::sigma_u_to_sigma)
                     .curve());
      dump_curve(dir / "curves" / "ellipse_piu.csv",
                 hetlab::circle_image(spec, web_c,
                                      hetlab::CircleImage::sigma_s_to_pi_u)
                     .curve());
      return exit_for(res);
    }

    if (c_loops->parsed()) {
      const LongRange nr = parse_range(loops_range_s);
      const auto res = hetlab::loop_parameters(spec, nr.lo, nr.hi);
      std::string csv = "n, mu_n\n";
      for (const auto& e : res.outputs.at("sequence")) {
        if (!e.contains("mu_n")) continue;
        csv += std::to_string(e.value("n", 0)) + ", " +
               fmt(e.value("mu_n", 0.0)) + "\n";
      }
      write_result(dir, res, csv);
      // Residual profile of the loop equation for the first round count.
      std::string prof = "mu,residual\n";
      const auto& j = spec.gmap_jet;
      for (int i = 1; i <= 200; ++i) {
        const double mu = 0.05 * i / 200.0;
        const double a = j.fam_a_of(mu);
        const double vb = spec.r + j.fam_b_of(mu);
        if (!(a > 0.0 && vb > 0.0) || a * vb > spec.zeta_max()) continue;
        prof += fmt(mu) + "," +
                fmt(a / vb - spec.eval_f_pow(a * vb, 2 * nr.lo)) + "\n";
      }
      write_text(dir / "curves" / "loop_residual.csv", prof);
      return exit_for(res);
    }

    if (c_ell->parsed()) {
      const DoubleRange cw = parse_window(c_window_s);
      const LongRange kr = parse_range(k_range_s);
      const auto res =
          hetlab::elliptic_scan(spec, cw.lo, cw.hi, kr.lo, kr.hi, c_grid);
      std::string csv = "c,k,u,v,trace,det,class\n";
      for (const auto& e : res.outputs.at("records")) {
        csv += fmt(e.value("c", 0.0)) + "," +
               std::to_string(e.value("k", 0L)) + "," +
               fmt(e.value("u", 0.0)) + "," + fmt(e.value("v", 0.0)) + "," +
               fmt(e.value("trace", 0.0)) + "," + fmt(e.value("det", 0.0)) +
               "," + e.value("class", std::string()) + "\n";
      }
      write_result(dir, res, csv);
      // Trace-versus-c profile per strip index, plot-ready.
      for (long k = kr.lo; k <= kr.hi; ++k) {
        std::string prof = "c,trace\n";
        for (const auto& e : res.outputs.at("records"))
          if (e.value("k", 0L) == k)
            prof += fmt(e.value("c", 0.0)) + "," +
                    fmt(e.value("trace", 0.0)) + "\n";
        write_text(dir / "curves" / ("trace_k" + std::to_string(k) + ".csv"),
                   prof);
      }
      return exit_for(res);
    }
  } catch (const hetlab::SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const hetlab::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  }
  return 1;
}
