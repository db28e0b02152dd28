// Command-line front end: curve/path/field file I/O and subcommands wiring
// the metric, geodesic, curvature and bounds machinery. Outputs are written
// atomically and are byte-identical across runs for identical inputs.
//
// Exit codes: 0 success, 1 numerical failure (immersion breakdown),
// 2 usage or I/O errors.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shapemetrics/bounds.hpp"
#include "shapemetrics/curvature.hpp"
#include "shapemetrics/geodesic.hpp"
#include "shapemetrics/io.hpp"

namespace sm = shapemetrics;
using sm::io::format_double;

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

sm::DiffScheme parse_scheme(const std::string& name) {
  if (name == "spectral") return sm::DiffScheme::spectral;
  if (name == "central") return sm::DiffScheme::central;
  throw CliError("unknown scheme \"" + name + "\" (expected spectral|central)");
}

std::vector<std::size_t> parse_freq_list(const std::string& text) {
  std::vector<std::size_t> freqs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      const long v = std::stol(item);
      if (v < 1) throw CliError("frequencies must be positive");
      freqs.push_back(std::size_t(v));
    } catch (const CliError&) {
      throw;
    } catch (const std::exception&) {
      throw CliError("malformed frequency list \"" + text + "\"");
    }
  }
  if (freqs.empty()) throw CliError("empty frequency list");
  return freqs;
}

// --a0 accepts a constant or a scalar-field file.
sm::ScalarField load_speed(const std::string& text, std::size_t n) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return sm::ScalarField(n, v);
  } catch (const std::exception&) {
  }
  sm::ScalarField f = sm::io::read_field(text);
  if (f.size() != n)
    throw CliError("--a0 field has " + std::to_string(f.size()) +
                   " samples, curve has " + std::to_string(n));
  return f;
}

std::string json_object(const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < kv.size(); ++i) {
    if (i) os << ",";
    os << "\"" << kv[i].first << "\":" << kv[i].second;
  }
  os << "}\n";
  return os.str();
}

std::string diagnostics_csv(const sm::ConformalFactor& cf, const sm::ShootResult& sr) {
  std::vector<std::vector<double>> rows;
  const std::size_t nt = sr.path.step_count();
  const double dt = sr.path.dt();
  for (std::size_t i = 0; i < nt; ++i) {
    double residual = 0.0;
    if (i > 0 && i + 1 < nt) {
      const sm::ScalarField rhs = sm::geodesic_rhs(cf, sr.path.curves[i], sr.speeds[i]);
      for (std::size_t j = 0; j < sr.speeds[i].size(); ++j) {
        const double fd = (sr.speeds[i + 1][j] - sr.speeds[i - 1][j]) / (2.0 * dt);
        residual = std::max(residual, std::abs(fd - rhs[j]));
      }
    }
    rows.push_back({sr.path.times[i], sr.ell[i], sr.mean_speed[i],
                    sr.speed_length_product[i], residual});
  }
  return sm::io::csv_table({"t", "ell", "mean_a", "a_ell_product", "residual"}, rows);
}

std::string sibling_csv_name(const std::string& json_name) {
  const std::string suffix = ".json";
  if (json_name.size() > suffix.size() &&
      json_name.substr(json_name.size() - suffix.size()) == suffix)
    return json_name.substr(0, json_name.size() - suffix.size()) +
           ".diagnostics.csv";
  return json_name + ".diagnostics.csv";
}

std::string report_payload(const std::vector<std::pair<std::string, double>>& kv,
                           const std::string& format) {
  if (format == "csv") {
    std::vector<std::string> header;
    std::vector<double> row;
    for (const auto& [k, v] : kv) {
      header.push_back(k);
      row.push_back(v);
    }
    return sm::io::csv_table(header, {row});
  }
  std::vector<std::pair<std::string, std::string>> jkv;
  for (const auto& [k, v] : kv) jkv.emplace_back(k, format_double(v));
  return json_object(jkv);
}

void emit(const std::string& out, const std::string& payload) {
  if (out.empty() || out == "-")
    std::cout << payload;
  else
    sm::io::write_text_atomic(out, payload);
}

int run(int argc, char** argv) {
  CLI::App app{"conformal metrics on closed planar curves"};
  app.require_subcommand(1);

  std::string curve_file, curve1_file, curve2_file, path_file, m_file, h_file;
  std::string phi_text = "length", a0_text, out_file, format = "json";
  std::string scheme_text = "spectral", freqs_text = "4,8,16,32";
  std::string out_path_file;
  double t_end = 1.0, r0 = 0.0, r1 = 0.0, t_eval = 0.0;
  double delta = 0.0, eps = 0.0, theta_start = 0.0, padding = 0.1;
  std::size_t steps = 200, grid = 512, teeth = 1, phase_steps = 40, n_resample = 0;
  unsigned long seed = 42;
  bool sweep = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_file, "output file (stdout if omitted)");
    cmd->add_option("--format", format, "output format: json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  CLI::App* geodesic = app.add_subcommand(
      "geodesic", "shoot the geodesic equation from a curve and normal speed");
  geodesic->add_option("--curve", curve_file, "curve JSON")->required();
  geodesic->add_option("--a0", a0_text, "initial normal speed: constant or field file")
      ->required();
  geodesic->add_option("--phi", phi_text, "conformal factor: one|length|exp:<A>");
  geodesic->add_option("--t-end", t_end, "integration time");
  geodesic->add_option("--steps", steps, "time steps");
  geodesic->add_option("--n", n_resample, "resample the curve to N samples first");
  add_common(geodesic);

  CLI::App* grassfire_cmd = app.add_subcommand(
      "grassfire", "constant-normal-speed evolution");
  grassfire_cmd->add_option("--curve", curve_file, "curve JSON")->required();
  grassfire_cmd->add_option("--a0", a0_text, "constant normal speed")->required();
  grassfire_cmd->add_option("--t-end", t_end, "integration time");
  grassfire_cmd->add_option("--steps", steps, "time steps");
  grassfire_cmd->add_option("--n", n_resample, "resample the curve to N samples first");
  add_common(grassfire_cmd);

  CLI::App* circle_exact = app.add_subcommand(
      "circle-exact", "closed-form concentric-circle geodesic radius");
  circle_exact->add_option("--r0", r0, "start radius")->required();
  circle_exact->add_option("--r1", r1, "end radius")->required();
  circle_exact->add_option("--t", t_eval, "time in [0, 1]")->required();

  CLI::App* curvature_cmd = app.add_subcommand(
      "curvature", "sectional curvature of the plane spanned by two fields");
  curvature_cmd->set_help_flag("--help", "print help");  // frees -h for --h
  curvature_cmd->add_option("--curve", curve_file, "arclength-parametrized curve JSON")
      ->required();
  curvature_cmd->add_option("--m", m_file, "first field JSON")->required();
  curvature_cmd->add_option("--h", h_file, "second field JSON")->required();
  curvature_cmd->add_option("--phi", phi_text, "conformal factor");
  curvature_cmd->add_option("--scheme", scheme_text, "spectral|central");
  add_common(curvature_cmd);

  CLI::App* probe = app.add_subcommand(
      "probe", "sectional curvature against wave frequency on the excess set");
  probe->add_option("--curve", curve_file, "arclength-parametrized curve JSON")
      ->required();
  probe->add_option("--m", m_file, "normalized field JSON")->required();
  probe->add_option("--phi", phi_text, "conformal factor");
  probe->add_option("--freqs", freqs_text, "comma-separated frequencies");
  probe->add_option("--scheme", scheme_text, "spectral|central");
  add_common(probe);

  CLI::App* bounds_cmd = app.add_subcommand(
      "bounds", "path length against the swept-area bounds");
  bounds_cmd->add_option("--path", path_file, "path JSON")->required();
  bounds_cmd->add_option("--phi", phi_text, "conformal factor");
  bounds_cmd->add_option("--grid", grid, "winding-number grid resolution");
  bounds_cmd->add_option("--scheme", scheme_text,
                         "spectral for smooth paths, central to use polyline "
                         "edge quadrature");
  add_common(bounds_cmd);

  CLI::App* bump = app.add_subcommand(
      "bump", "saw-tooth path creating a rectangular bump, with its cost bound");
  bump->add_option("--curve", curve_file, "base curve JSON")->required();
  bump->add_option("--delta", delta, "support length (arclength)")->required();
  bump->add_option("--eps", eps, "bump height")->required();
  bump->add_option("--teeth", teeth, "tooth count")->required();
  bump->add_option("--phi", phi_text, "conformal factor");
  bump->add_option("--theta-start", theta_start, "support start (arclength)");
  bump->add_option("--phase-steps", phase_steps, "time steps per phase");
  bump->add_flag("--sweep", sweep, "sweep teeth over doublings 4..teeth");
  bump->add_option("--out-path", out_path_file, "also write the path JSON here");
  add_common(bump);

  CLI::App* dflat = app.add_subcommand(
      "dflat", "L1 distance between winding-number functions");
  dflat->add_option("--curve1", curve1_file, "first curve JSON")->required();
  dflat->add_option("--curve2", curve2_file, "second curve JSON")->required();
  dflat->add_option("--grid", grid, "grid resolution");
  dflat->add_option("--padding", padding, "bounding-box margin");
  add_common(dflat);

  CLI::App* variation = app.add_subcommand(
      "variation", "first-variation check of the path energy");
  variation->add_option("--path", path_file, "path JSON")->required();
  variation->add_option("--phi", phi_text, "conformal factor");
  variation->add_option("--seed", seed, "perturbation seed");
  add_common(variation);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the parse error
    return code == 0 ? 0 : 2;
  }

  if (geodesic->parsed() || grassfire_cmd->parsed()) {
    sm::DiscreteCurve c = sm::io::read_curve(curve_file);
    if (n_resample > 0) c = sm::resample_arclength(c, n_resample);
    const std::string out = out_file.empty() ? "path.json" : out_file;
    if (geodesic->parsed()) {
      const sm::ConformalFactor cf = sm::parse_conformal(phi_text);
      const sm::ScalarField a0 = load_speed(a0_text, c.size());
      const sm::ShootResult sr = sm::geodesic_shoot(cf, c, a0, t_end, steps);
      sm::io::write_path(sr.path, out);
      sm::io::write_text_atomic(sibling_csv_name(out), diagnostics_csv(cf, sr));
      std::cout << "wrote " << out << " and " << sibling_csv_name(out) << "\n";
    } else {
      std::size_t used = 0;
      double speed = 0.0;
      try {
        speed = std::stod(a0_text, &used);
      } catch (const std::exception&) {
      }
      if (used != a0_text.size())
        throw CliError("grassfire expects a constant --a0");
      const sm::CurvePath p = sm::grassfire(c, speed, t_end, steps);
      sm::io::write_path(p, out);
      std::cout << "wrote " << out << "\n";
    }
    return 0;
  }

  if (circle_exact->parsed()) {
    const double r = sm::circle_geodesic_exact(sm::ConformalFactor::length(),
                                               r0, r1, t_eval);
    std::cout << format_double(r, 8) << "\n";
    return 0;
  }

  if (curvature_cmd->parsed()) {
    const sm::DiscreteCurve c = sm::io::read_curve(curve_file);
    const sm::ConformalFactor cf = sm::parse_conformal(phi_text);
    const sm::DiffScheme scheme = parse_scheme(scheme_text);
    const sm::TangentPlane plane = sm::orthonormalize(
        cf, c, sm::io::read_field(m_file), sm::io::read_field(h_file), scheme);
    const double kc = sm::sectional_curvature(cf, plane, scheme);
    const sm::BoundednessReport br = sm::boundedness(cf, c, plane.m, scheme);
    if (format == "csv") {
      emit(out_file, sm::io::csv_table({"k_c", "bounded", "margin"},
                                       {{kc, br.bounded ? 1.0 : 0.0, br.margin}}));
    } else {
      emit(out_file, json_object({{"k_c", format_double(kc)},
                                  {"bounded", br.bounded ? "true" : "false"},
                                  {"margin", format_double(br.margin)}}));
    }
    return 0;
  }

  if (probe->parsed()) {
    const sm::DiscreteCurve c = sm::io::read_curve(curve_file);
    const sm::ConformalFactor cf = sm::parse_conformal(phi_text);
    const std::vector<std::size_t> freqs = parse_freq_list(freqs_text);
    const sm::ProbeResult pr = sm::curvature_blowup_probe(
        cf, c, sm::io::read_field(m_file), freqs, parse_scheme(scheme_text));
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < freqs.size(); ++i)
      rows.push_back({double(freqs[i]), pr.values[i]});
    emit(out_file, sm::io::csv_table({"frequency", "k_c"}, rows));
    return 0;
  }

  if (bounds_cmd->parsed()) {
    const sm::CurvePath p = sm::io::read_path(path_file);
    const sm::ConformalFactor cf = sm::parse_conformal(phi_text);
    const sm::PathScheme ps = parse_scheme(scheme_text) == sm::DiffScheme::central
                                  ? sm::PathScheme::polyline
                                  : sm::PathScheme::smooth;
    const sm::BoundsReport rep =
        sm::swept_area_bounds(cf, p, ps, sm::GridSpec{grid, padding});
    std::vector<std::pair<std::string, double>> kv = {
        {"path_length", rep.path_length_value},
        {"swept_area", rep.swept_area},
        {"lower_bound", rep.lower_bound},
        {"upper_bound", rep.upper_bound.value_or(0.0)},
        {"d_flat_lower", rep.d_flat_lower.value_or(0.0)},
        {"ratio", rep.ratio},
        {"strict_gap_regime", rep.strict_gap_regime ? 1.0 : 0.0}};
    emit(out_file, report_payload(kv, format));
    return 0;
  }

  if (bump->parsed()) {
    const sm::DiscreteCurve base = sm::io::read_curve(curve_file);
    const sm::ConformalFactor cf = sm::parse_conformal(phi_text);
    sm::BumpSpec spec;
    spec.theta_start = theta_start;
    spec.delta = delta;
    spec.epsilon = eps;
    spec.phase_steps = phase_steps;

    if (sweep) {
      std::vector<std::vector<double>> rows;
      for (std::size_t m = 4; m <= teeth; m *= 2) {
        spec.teeth = m;
        const sm::BumpConstruction bc = sm::bump_path_detailed(base, spec, cf);
        const double L = sm::path_length(cf, bc.path, sm::PathScheme::polyline);
        const double bound = cf.kind == sm::FactorKind::one
                                 ? 0.0
                                 : sm::bump_bound(base, spec, cf);
        rows.push_back({double(m), bc.eta, L, bound,
                        bound > 0.0 ? L / bound : 0.0});
      }
      emit(out_file, sm::io::csv_table({"teeth", "eta", "L", "bound", "ratio"}, rows));
      return 0;
    }

    spec.teeth = teeth;
    const sm::BumpConstruction bc = sm::bump_path_detailed(base, spec, cf);
    const double L = sm::path_length(cf, bc.path, sm::PathScheme::polyline);
    const double bound =
        cf.kind == sm::FactorKind::one ? 0.0 : sm::bump_bound(base, spec, cf);
    if (!out_path_file.empty()) sm::io::write_path(bc.path, out_path_file);
    emit(out_file, report_payload({{"teeth", double(teeth)},
                                   {"eta", bc.eta},
                                   {"L", L},
                                   {"bound", bound},
                                   {"ratio", bound > 0.0 ? L / bound : 0.0}},
                                  format));
    return 0;
  }

  if (dflat->parsed()) {
    const double v = sm::d_flat(sm::io::read_curve(curve1_file),
                                sm::io::read_curve(curve2_file),
                                sm::GridSpec{grid, padding});
    emit(out_file, report_payload({{"d_flat", v}}, format));
    return 0;
  }

  if (variation->parsed()) {
    const sm::CurvePath p = sm::io::read_path(path_file);
    const std::size_t nt = p.step_count(), n = p.samples();

    // seeded smooth normal perturbation vanishing at the endpoint times
    std::uint64_t state = seed ? seed : 1;
    auto uniform = [&state]() {
      state ^= state >> 12;
      state ^= state << 25;
      state ^= state >> 27;
      return double((state * 0x2545f4914f6cdd1dull) >> 11) / 9007199254740992.0;
    };
    std::vector<double> amp(5), phase(5);
    for (int k = 0; k < 5; ++k) {
      amp[k] = 2.0 * uniform() - 1.0;
      phase[k] = sm::two_pi * uniform();
    }
    std::vector<std::vector<sm::Point2>> v(nt, std::vector<sm::Point2>(n));
    for (std::size_t i = 0; i < nt; ++i) {
      const double env =
          std::sin(sm::pi * (p.times[i] - p.times.front()) / p.duration());
      const sm::CurveGeometry g = sm::geometry(p.curves[i]);
      for (std::size_t j = 0; j < n; ++j) {
        const double th = sm::two_pi * double(j) / double(n);
        double a = 0.0;
        for (int k = 0; k < 5; ++k)
          a += amp[k] * std::cos(double(k) * th + phase[k]);
        v[i][j] = (env * a) * g.normal[j];
      }
    }
    for (auto& q : v.front()) q = {0.0, 0.0};
    for (auto& q : v.back()) q = {0.0, 0.0};

    const sm::VariationCheck vc =
        sm::first_variation_check(sm::parse_conformal(phi_text), p, v);
    emit(out_file, report_payload({{"dE_fd", vc.fd_derivative},
                                   {"dE_formula", vc.formula_derivative},
                                   {"relative_error", vc.relative_error}},
                                  format));
    return 0;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const sm::immersion_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
