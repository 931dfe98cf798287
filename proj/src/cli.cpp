#include "hcf/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "hcf/errors.hpp"

namespace fs = std::filesystem;

namespace hcf::cli {

using forms::HermitianForm;

// ---------------------------------------------------------------- initial forms

namespace {

std::vector<double> parse_number_list(std::string_view text, const std::string& context) {
  std::vector<double> out;
  std::string s(text);
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(' ');
    const auto e = cell.find_last_not_of(' ');
    if (b == std::string::npos) throw ParseError(context + ": empty entry");
    cell = cell.substr(b, e - b + 1);
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
      throw ParseError(context + ": bad number '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

std::string join_numbers(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string InitialFormSpec::to_string() const {
  auto random_args = [this]() {
    if (!seed && scale == 1.0) return std::string();
    std::string s = "(" + (seed ? std::to_string(*seed) : std::string("run"));
    if (scale != 1.0) s += "," + format_double(scale);
    return s + ")";
  };
  switch (kind) {
    case Kind::Identity: return "identity";
    case Kind::Scalar: return "scalar:" + join_numbers(values);
    case Kind::Diagonal: return "diag:" + join_numbers(values);
    case Kind::RandomPd: return "random_pd" + random_args();
    case Kind::RandomDiag: return "random_diag" + random_args();
    case Kind::File: return "file:" + path;
  }
  return "?";
}

InitialFormSpec parse_initial_form(std::string_view text) {
  const std::string s(text);
  InitialFormSpec spec;
  if (s == "identity") return spec;
  if (s.rfind("scalar:", 0) == 0) {
    spec.kind = InitialFormSpec::Kind::Scalar;
    spec.values = parse_number_list(s.substr(7), "h0 " + s);
    if (spec.values.size() != 1) throw ParseError("h0 scalar: needs exactly one value");
    return spec;
  }
  if (s.rfind("diag:", 0) == 0) {
    spec.kind = InitialFormSpec::Kind::Diagonal;
    spec.values = parse_number_list(s.substr(5), "h0 " + s);
    return spec;
  }
  if (s.rfind("file:", 0) == 0) {
    spec.kind = InitialFormSpec::Kind::File;
    spec.path = s.substr(5);
    return spec;
  }
  for (const auto& [prefix, kind] : {std::pair{std::string("random_pd"), InitialFormSpec::Kind::RandomPd},
                                     std::pair{std::string("random_diag"), InitialFormSpec::Kind::RandomDiag}}) {
    if (s.rfind(prefix, 0) != 0) continue;
    spec.kind = kind;
    std::string rest = s.substr(prefix.size());
    if (rest.empty()) return spec;
    if (rest.front() != '(' || rest.back() != ')') throw ParseError("h0 '" + s + "': expected (seed[,scale])");
    rest = rest.substr(1, rest.size() - 2);
    const auto comma = rest.find(',');
    const std::string seed_text = rest.substr(0, comma);
    if (!seed_text.empty() && seed_text != "run") {
      std::uint64_t seed = 0;
      const auto res = std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), seed);
      if (res.ec != std::errc() || res.ptr != seed_text.data() + seed_text.size())
        throw ParseError("h0 '" + s + "': bad seed");
      spec.seed = seed;
    }
    if (comma != std::string::npos) {
      const auto v = parse_number_list(rest.substr(comma + 1), "h0 " + s);
      if (v.size() != 1 || !(v[0] > 0)) throw ParseError("h0 '" + s + "': scale must be positive");
      spec.scale = v[0];
    }
    return spec;
  }
  if (fs::exists(s)) {
    spec.kind = InitialFormSpec::Kind::File;
    spec.path = s;
    return spec;
  }
  throw ParseError("unknown initial form '" + s + "'");
}

HermitianForm resolve_initial_form(const InitialFormSpec& spec, int dim, std::uint64_t run_seed) {
  switch (spec.kind) {
    case InitialFormSpec::Kind::Identity: return HermitianForm::identity(dim);
    case InitialFormSpec::Kind::Scalar: return spec.values.at(0) * HermitianForm::identity(dim);
    case InitialFormSpec::Kind::Diagonal: {
      if (static_cast<int>(spec.values.size()) != dim)
        throw ArgumentError("h0 diag: has " + std::to_string(spec.values.size()) +
                            " entries, algebra has dimension " + std::to_string(dim));
      return HermitianForm::diagonal(Eigen::Map<const RVector>(spec.values.data(), dim));
    }
    case InitialFormSpec::Kind::RandomPd:
    case InitialFormSpec::Kind::RandomDiag: {
      std::mt19937_64 rng(spec.seed.value_or(run_seed));
      return spec.kind == InitialFormSpec::Kind::RandomPd
                 ? forms::random_positive_definite(dim, rng, spec.scale)
                 : forms::random_positive_diagonal(dim, rng, spec.scale);
    }
    case InitialFormSpec::Kind::File: {
      std::ifstream in(spec.path);
      if (!in) throw ParseError("cannot open form file " + spec.path);
      try {
        return forms::form_from_json(nlohmann::json::parse(in), dim);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError("form file " + spec.path + ": " + e.what());
      }
    }
  }
  throw ArgumentError("unhandled initial form");
}

// ---------------------------------------------------------------- run config

flow::IntegratorConfig default_cli_integrator() {
  flow::IntegratorConfig cfg;
  cfg.t_end = 100.0;
  cfg.sample_interval = cfg.t_end / 1000.0;
  cfg.record_steps = true;
  return cfg;
}

nlohmann::json to_json(const RunConfig& cfg) {
  return {{"algebra", lie::to_json(cfg.algebra)},
          {"algebra_text", cfg.algebra.to_string()},
          {"h0", cfg.h0.to_string()},
          {"integrator", flow::to_json(cfg.integrator)},
          {"out", cfg.out_dir},
          {"seed", cfg.seed},
          {"name", cfg.name}};
}

RunConfig run_config_from_json(const nlohmann::json& j, RunConfig cfg) {
  try {
    if (j.contains("algebra")) {
      const auto& a = j.at("algebra");
      cfg.algebra = a.is_string() ? lie::parse_algebra_spec(a.get<std::string>())
                                  : lie::algebra_spec_from_json(a);
    }
    if (j.contains("h0")) cfg.h0 = parse_initial_form(j.at("h0").get<std::string>());
    if (j.contains("integrator"))
      cfg.integrator = flow::integrator_config_from_json(j.at("integrator"), cfg.integrator);
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("name")) cfg.name = j.at("name").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("run config: ") + e.what());
  }
  return cfg;
}

// ---------------------------------------------------------------- records

bool RunRecord::integration_failed() const {
  return !error.empty() || termination == flow::Termination::StepUnderflow ||
         termination == flow::Termination::MaxSteps;
}

nlohmann::json to_json(const RunRecord& rec) {
  nlohmann::json j = {{"version", rec.version},
                      {"config", to_json(rec.config)},
                      {"files", {{"csv", rec.csv_path}, {"plot", rec.plot_path}}},
                      {"termination", flow::to_string(rec.termination)},
                      {"t_last", rec.t_last},
                      {"samples", rec.samples},
                      {"einstein", analysis::to_json(rec.einstein)},
                      {"warnings", rec.warnings},
                      {"wall_time_s", rec.wall_time}};
  j["growth"] = rec.growth ? analysis::to_json(*rec.growth) : nlohmann::json(nullptr);
  if (!rec.growth_error.empty()) j["growth_error"] = rec.growth_error;
  j["blowup_time_estimate"] = rec.blowup_time ? nlohmann::json(*rec.blowup_time) : nlohmann::json(nullptr);
  j["pinching_floor"] = rec.pinching_floor ? nlohmann::json(*rec.pinching_floor) : nlohmann::json(nullptr);
  if (!rec.error.empty()) j["error"] = rec.error;
  return j;
}

void write_trajectory_csv(const flow::Trajectory& traj, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path);
  const int d = traj.algebra.dim();
  out << "t";
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) out << ",re_" << a << "_" << b << ",im_" << a << "_" << b;
  for (const auto& name : traj.monitor_names) out << "," << name;
  out << "\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << format_double(traj.times[i]);
    const CMatrix& m = traj.forms[i].matrix();
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b)
        out << "," << format_double(m(a, b).real()) << "," << format_double(m(a, b).imag());
    for (const auto& series : traj.monitor_values) out << "," << format_double(series[i]);
    out << "\n";
  }
}

void write_plot_script(const std::string& csv_path, const std::string& script_path) {
  std::ofstream out(script_path);
  if (!out) throw ArgumentError("cannot write " + script_path);
  const std::string csv = fs::path(csv_path).filename().string();
  const std::string png = fs::path(csv_path).stem().string() + ".png";
  out << "# gnuplot " << fs::path(script_path).filename().string() << "\n"
      << "set datafile separator ','\n"
      << "set terminal pngcairo size 900,600\n"
      << "set output '" << png << "'\n"
      << "set xlabel 't'\n"
      << "set logscale y\n"
      << "set key top left\n"
      << "plot '" << csv << "' using 1:(column('sup_norm')) with lines title 'sup norm', \\\n"
      << "     '' using 1:(abs(column('min_eigenvalue'))) with lines title '|min eigenvalue|'\n";
}

namespace {

std::optional<HermitianForm> pinching_target(const lie::LieAlgebra& alg) {
  // Dual of the negated Killing form, when that is positive definite.
  const CMatrix neg_killing = -lie::killing_metric(alg);
  Eigen::LLT<CMatrix> llt(neg_killing);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const HermitianForm k(neg_killing);
  if (forms::positivity(k).status != forms::Positivity::PositiveDefinite) return std::nullopt;
  return HermitianForm(llt.solve(CMatrix::Identity(alg.dim(), alg.dim())));
}

fs::path out_dir_for(const RunConfig& cfg) { return fs::path(cfg.out_dir); }

}  // namespace

RunRecord execute_run(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.config = cfg;
  const fs::path dir = out_dir_for(cfg);
  fs::create_directories(dir);
  rec.csv_path = (dir / (cfg.name + ".csv")).string();
  rec.record_path = (dir / (cfg.name + ".run.json")).string();
  rec.plot_path = (dir / (cfg.name + ".gp")).string();

  // Config errors propagate; everything after integration is recorded.
  const lie::LieAlgebra alg = lie::construct_algebra(cfg.algebra);
  const HermitianForm h0 = resolve_initial_form(cfg.h0, alg.dim(), cfg.seed);
  cfg.integrator.validate();

  flow::Trajectory traj{alg, cfg.integrator};
  try {
    traj = flow::integrate(alg, h0, cfg.integrator);
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  rec.termination = traj.termination;
  rec.t_last = traj.t_last;
  rec.samples = traj.size();
  rec.warnings = traj.warnings;

  if (traj.size() > 0) {
    write_trajectory_csv(traj, rec.csv_path);
    write_plot_script(rec.csv_path, rec.plot_path);
    try {
      rec.growth = analysis::classify_growth(traj);
    } catch (const std::exception& e) {
      rec.growth_error = e.what();
    }
    if (traj.termination == flow::Termination::BlowupDetected) {
      try {
        rec.blowup_time = analysis::estimate_blowup_time(traj);
      } catch (const std::exception&) {
      }
    }
    if (const auto target = pinching_target(alg)) {
      const auto d = analysis::pinching_series(traj, *target);
      double best = std::numeric_limits<double>::infinity();
      for (double v : d)
        if (std::isfinite(v)) best = std::min(best, v);
      if (std::isfinite(best)) rec.pinching_floor = best;
    }
    const HermitianForm& last = traj.forms.back();
    if (forms::frobenius_norm(last) > 0) {
      const double sup = forms::sup_norm(last);
      rec.einstein = analysis::einstein_residual(alg, (1.0 / sup) * last);
    }
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream(rec.record_path) << to_json(rec).dump(2) << "\n";
  return rec;
}

// ---------------------------------------------------------------- flow

namespace {

void print_run_summary(const RunRecord& rec, std::ostream& out) {
  out << "algebra      " << rec.config.algebra.to_string() << "\n"
      << "h0           " << rec.config.h0.to_string() << "\n"
      << "termination  " << flow::to_string(rec.termination) << " at t = " << format_double(rec.t_last)
      << "\n"
      << "samples      " << rec.samples << "\n";
  if (rec.growth) {
    out << "regime       " << analysis::to_string(rec.growth->regime);
    switch (rec.growth->regime) {
      case analysis::Regime::Polynomial: out << " degree " << rec.growth->degree; break;
      case analysis::Regime::Exponential: out << " rate " << rec.growth->rate; break;
      case analysis::Regime::FiniteTimeBlowup: out << " t* " << rec.growth->t_star; break;
    }
    out << "\n";
  } else {
    out << "regime       unavailable (" << rec.growth_error << ")\n";
  }
  if (rec.blowup_time) out << "t* (1/norm)  " << *rec.blowup_time << "\n";
  if (rec.pinching_floor) out << "pinching     " << *rec.pinching_floor << "\n";
  out << "einstein     lambda* " << rec.einstein.lambda_star << " residual " << rec.einstein.residual
      << "\n"
      << "csv          " << rec.csv_path << "\n";
  for (const auto& w : rec.warnings) out << "warning      " << w << "\n";
}

}  // namespace

int cmd_flow(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  RunRecord rec;
  try {
    rec = execute_run(cfg);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  print_run_summary(rec, out);
  if (rec.integration_failed()) {
    err << "integration failed: "
        << (rec.error.empty() ? flow::to_string(rec.termination) : rec.error) << "\n";
    return kExitIntegration;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

SweepSummary run_sweep(const SweepConfig& cfg) {
  if (cfg.count < 1) throw ArgumentError("sweep: count must be >= 1");
  // Resolve once up front so config errors surface before any work starts.
  const lie::LieAlgebra alg = lie::construct_algebra(cfg.base.algebra);
  cfg.base.integrator.validate();
  (void)resolve_initial_form(cfg.base.h0, alg.dim(), cfg.base.seed);

  SweepSummary res;
  res.runs.resize(static_cast<std::size_t>(cfg.count));
  std::vector<RunConfig> configs;
  for (int i = 0; i < cfg.count; ++i) {
    RunConfig rc = cfg.base;
    rc.seed = cfg.base.seed + static_cast<std::uint64_t>(i);
    char suffix[16];
    std::snprintf(suffix, sizeof suffix, "_%04d", i);
    rc.name = cfg.base.name + suffix;
    configs.push_back(std::move(rc));
  }

  int jobs = cfg.jobs > 0 ? cfg.jobs : static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::clamp(jobs, 1, cfg.count);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next++; i < cfg.count; i = next++) {
      try {
        res.runs[i] = execute_run(configs[i]);
      } catch (const std::exception& e) {
        res.runs[i].config = configs[i];
        res.runs[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < jobs; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::map<std::string, int> regimes;
  nlohmann::json runs = nlohmann::json::array();
  nlohmann::json blowup_times = nlohmann::json::array();
  int failures = 0;
  double worst_pinching = 0.0;
  bool any_pinching = false;
  for (const auto& rec : res.runs) {
    const bool failed = rec.integration_failed();
    failures += failed ? 1 : 0;
    nlohmann::json r = {{"seed", rec.config.seed},
                        {"csv", rec.csv_path},
                        {"termination", flow::to_string(rec.termination)},
                        {"failed", failed}};
    if (!rec.error.empty()) r["error"] = rec.error;
    if (rec.growth) {
      const std::string name = analysis::to_string(rec.growth->regime);
      ++regimes[name];
      r["regime"] = name;
      r["growth"] = analysis::to_json(*rec.growth);
    } else {
      ++regimes["Unclassified"];
      r["regime"] = nullptr;
    }
    if (rec.blowup_time) {
      r["blowup_time_estimate"] = *rec.blowup_time;
      blowup_times.push_back(*rec.blowup_time);
    }
    if (rec.pinching_floor) {
      r["pinching_floor"] = *rec.pinching_floor;
      worst_pinching = std::max(worst_pinching, *rec.pinching_floor);
      any_pinching = true;
    }
    r["einstein_residual"] = rec.einstein.residual;
    runs.push_back(std::move(r));
  }
  res.summary = {{"version", kVersion},
                 {"algebra", cfg.base.algebra.to_string()},
                 {"h0", cfg.base.h0.to_string()},
                 {"count", cfg.count},
                 {"failed", failures},
                 {"regime_counts", regimes},
                 {"blowup_times", blowup_times},
                 {"runs", runs}};
  res.summary["max_pinching_floor"] = any_pinching ? nlohmann::json(worst_pinching) : nlohmann::json(nullptr);
  res.exit_code = failures == cfg.count ? kExitIntegration : kExitOk;
  fs::create_directories(cfg.base.out_dir);
  std::ofstream(fs::path(cfg.base.out_dir) / (cfg.base.name + "_summary.json"))
      << res.summary.dump(2) << "\n";
  return res;
}

int cmd_sweep(const SweepConfig& cfg, std::ostream& out, std::ostream& err) {
  SweepSummary res;
  try {
    res = run_sweep(cfg);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  out << "sweep " << cfg.base.algebra.to_string() << " x" << cfg.count << "\n";
  for (const auto& [name, n] : res.summary["regime_counts"].items())
    out << "  " << name << ": " << n.get<int>() << "/" << cfg.count << "\n";
  if (!res.summary["max_pinching_floor"].is_null())
    out << "  max pinching floor: " << res.summary["max_pinching_floor"].get<double>() << "\n";
  out << "  failed: " << res.summary["failed"].get<int>() << "\n";
  for (const auto& rec : res.runs)
    if (rec.integration_failed())
      err << "run seed " << rec.config.seed << " failed: "
          << (rec.error.empty() ? flow::to_string(rec.termination) : rec.error) << "\n";
  return res.exit_code;
}

// ---------------------------------------------------------------- verify

VerifyReport run_verify(const VerifyConfig& cfg) {
  if (cfg.trials < 1) throw ArgumentError("verify: trials must be >= 1");
  const geometry::HomogeneousModel model = geometry::build_model(cfg.model);
  VerifyReport rep;
  rep.model = cfg.model.to_string();
  rep.sign_convention = model.sign_convention;
  rep.trials = cfg.trials;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss;
  const int n = model.ambient_dim;
  auto draw_point = [&]() {
    for (;;) {
      CVector z(n);
      for (int i = 0; i < n; ++i) z(i) = Complex(gauss(rng), gauss(rng));
      if (!model.domain_guard || model.domain_guard(z)) return z;
    }
  };
  double worst_score = -1.0;
  for (int t = 0; t < cfg.trials; ++t) {
    const CVector z = draw_point();
    const HermitianForm h = forms::random_positive_definite(model.alg.dim(), rng);
    const CMatrix brackets = geometry::theta_brackets(model, h, z);
    VerifyCase c{z, h};
    c.analytic = geometry::relative_deviation(geometry::theta_coordinate(model, h, z), brackets);
    c.fd = geometry::relative_deviation(geometry::theta_coordinate_fd(model, h, z), brackets);
    c.push = geometry::relative_deviation(geometry::pushed_sharp_square(model, h, z), brackets);
    rep.max_analytic = std::max(rep.max_analytic, c.analytic);
    rep.max_fd = std::max(rep.max_fd, c.fd);
    rep.max_push = std::max(rep.max_push, c.push);
    const CVector z2 = draw_point();
    rep.max_point_variation = std::max(
        rep.max_point_variation,
        geometry::relative_deviation(geometry::theta_brackets(model, h, z2), brackets));
    const double score = std::max({c.analytic / cfg.analytic_tol, c.fd / cfg.fd_tol, c.push / cfg.push_tol});
    if (score > worst_score) {
      worst_score = score;
      rep.worst = c;
    }
  }
  rep.passed = rep.max_analytic < cfg.analytic_tol && rep.max_fd < cfg.fd_tol &&
               rep.max_push < cfg.push_tol;
  return rep;
}

int cmd_verify(const VerifyConfig& cfg, std::ostream& out, std::ostream& err) {
  VerifyReport rep;
  try {
    rep = run_verify(cfg);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  out << "model                 " << rep.model << " (bracket sign " << rep.sign_convention << ")\n"
      << "trials                " << rep.trials << "\n"
      << "max rel dev analytic  " << rep.max_analytic << "\n"
      << "max rel dev fd        " << rep.max_fd << "\n"
      << "max rel dev pushed    " << rep.max_push << "\n"
      << "theta variation in z  " << rep.max_point_variation
      << (rep.max_point_variation < 1e-10 ? " (constant)" : "") << "\n";
  if (rep.passed) {
    out << "PASS\n";
    return kExitOk;
  }
  err << "FAIL: worst case\n";
  if (rep.worst) {
    const auto& w = *rep.worst;
    err << "  z =";
    for (Eigen::Index i = 0; i < w.z.size(); ++i)
      err << " (" << format_double(w.z(i).real()) << "," << format_double(w.z(i).imag()) << ")";
    err << "\n  h = " << forms::to_json(w.h).dump() << "\n"
        << "  deviation analytic " << w.analytic << " fd " << w.fd << " pushed " << w.push << "\n";
  }
  return kExitVerify;
}

// ---------------------------------------------------------------- classify

int cmd_classify(const lie::AlgebraSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    const lie::LieAlgebra alg = lie::construct_algebra(spec);
    const lie::AlgebraClass cls = lie::classify_algebra(alg);
    nlohmann::json j = lie::to_json(cls);
    j["algebra"] = spec.to_string();
    j["dim"] = alg.dim();
    out << j.dump(2) << "\n";
    if (cls.ill_conditioned) err << "warning: " << cls.warning << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
}

// ---------------------------------------------------------------- report

int cmd_report(const std::string& dir, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(dir)) {
    err << "no such directory: " << dir << "\n";
    return kExitNoData;
  }
  struct Row {
    std::string algebra;
    std::uint64_t seed;
    std::string file;
    nlohmann::json rec;
  };
  std::vector<Row> rows;
  std::vector<std::string> bad;
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 9 && name.ends_with(".run.json")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    try {
      std::ifstream in(p);
      nlohmann::json j = nlohmann::json::parse(in);
      const auto& c = j.at("config");
      rows.push_back({c.at("algebra_text").get<std::string>(), c.at("seed").get<std::uint64_t>(),
                      p.string(), std::move(j)});
    } catch (const std::exception& e) {
      bad.push_back(p.string() + ": " + e.what());
    }
  }
  for (const auto& b : bad) err << "skipping corrupt record " << b << "\n";
  if (rows.empty()) {
    err << "no run records in " << dir << "\n";
    return kExitNoData;
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.algebra != b.algebra ? a.algebra < b.algebra : a.seed < b.seed;
  });

  auto num = [](const nlohmann::json& v) {
    return v.is_number() ? format_double(v.get<double>()) : std::string("-");
  };
  std::ostringstream md;
  md << "| run | algebra | seed | h0 | termination | regime | degree / rate | t* | einstein residual |\n"
     << "|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    const auto& j = r.rec;
    const auto& g = j.value("growth", nlohmann::json());
    std::string regime = "-", param = "-", t_star = "-";
    if (g.is_object()) {
      regime = g.value("regime", "-");
      if (g.contains("degree")) param = num(g["degree"]);
      if (g.contains("rate")) param = num(g["rate"]);
      if (g.contains("t_star")) {
        t_star = num(j.value("blowup_time_estimate", nlohmann::json()));
        if (t_star == "-") t_star = num(g["t_star"]);
      }
    }
    const auto& e = j.value("einstein", nlohmann::json::object());
    md << "| " << j["config"].value("name", "?") << " | " << r.algebra << " | " << r.seed << " | "
       << j["config"].value("h0", "?") << " | " << j.value("termination", "?") << " | " << regime
       << " | " << param << " | " << t_star << " | " << num(e.value("residual", nlohmann::json()))
       << " |\n";
    // Regenerate the plot script next to its CSV.
    const fs::path csv = j.at("files").value("csv", "");
    if (!csv.empty() && fs::exists(csv)) {
      fs::path script = csv;
      script.replace_extension(".gp");
      write_plot_script(csv.string(), script.string());
    }
  }
  out << md.str();
  std::ofstream(fs::path(dir) / "report.md") << md.str();
  return kExitOk;
}

// ---------------------------------------------------------------- command line

namespace {

struct FlowFlags {
  std::string algebra, h0, out, name, config;
  double t_end = 0, rel_tol = 0, abs_tol = 0, blowup_norm = 0, min_step = 0, sample_interval = 0;
  std::size_t max_steps = 0;
  std::uint64_t seed = 0;
};

void add_flow_flags(CLI::App* sub, FlowFlags& f) {
  sub->add_option("--config", f.config, "JSON run config");
  sub->add_option("--algebra", f.algebra, "algebra spec, e.g. su2c, strict_upper:3, borel:2");
  sub->add_option("--h0", f.h0, "initial form: identity, diag:..., random_pd(seed,scale), file:...");
  sub->add_option("--t-end", f.t_end, "final time (inf for unbounded)");
  sub->add_option("--rel-tol", f.rel_tol);
  sub->add_option("--abs-tol", f.abs_tol);
  sub->add_option("--blowup-norm", f.blowup_norm);
  sub->add_option("--min-step", f.min_step);
  sub->add_option("--max-steps", f.max_steps);
  sub->add_option("--sample-interval", f.sample_interval, "0 stores every accepted step");
  sub->add_option("--seed", f.seed);
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--name", f.name, "file stem");
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config " + path + ": " + e.what());
  }
}

RunConfig resolve_run_config(const CLI::App* sub, const FlowFlags& f, const std::string& default_h0,
                             const std::string& default_name) {
  RunConfig cfg;
  cfg.integrator = default_cli_integrator();
  cfg.h0 = parse_initial_form(default_h0);
  cfg.name = default_name;
  bool explicit_interval = false;
  if (!f.config.empty()) {
    const nlohmann::json j = read_json_file(f.config);
    cfg = run_config_from_json(j, cfg);
    explicit_interval = j.contains("integrator") && j["integrator"].contains("sample_interval");
  } else if (!sub->count("--algebra")) {
    throw ParseError("--algebra is required");
  }
  if (sub->count("--algebra")) cfg.algebra = lie::parse_algebra_spec(f.algebra);
  if (sub->count("--h0")) cfg.h0 = parse_initial_form(f.h0);
  if (sub->count("--t-end")) cfg.integrator.t_end = f.t_end;
  if (sub->count("--rel-tol")) cfg.integrator.rel_tol = f.rel_tol;
  if (sub->count("--abs-tol")) cfg.integrator.abs_tol = f.abs_tol;
  if (sub->count("--blowup-norm")) cfg.integrator.blowup_norm = f.blowup_norm;
  if (sub->count("--min-step")) cfg.integrator.min_step = f.min_step;
  if (sub->count("--max-steps")) cfg.integrator.max_steps = f.max_steps;
  if (sub->count("--sample-interval")) {
    cfg.integrator.sample_interval = f.sample_interval;
    explicit_interval = true;
  }
  if (!explicit_interval)
    cfg.integrator.sample_interval = std::isfinite(cfg.integrator.t_end) ? cfg.integrator.t_end / 1000.0 : 0.0;
  if (sub->count("--seed")) cfg.seed = f.seed;
  if (sub->count("--out")) cfg.out_dir = f.out;
  if (sub->count("--name")) cfg.name = f.name;
  if (const char* env = std::getenv("HCF_OUT"); env && *env) cfg.out_dir = env;
  cfg.integrator.validate();
  return cfg;
}

}  // namespace

int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hermitian curvature flow on Lie groups"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  FlowFlags flow_flags;
  auto* flow_cmd = app.add_subcommand("flow", "integrate one trajectory");
  add_flow_flags(flow_cmd, flow_flags);

  FlowFlags sweep_flags;
  int count = 1, jobs = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "seeded random initial forms, run concurrently");
  add_flow_flags(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--count", count, "number of runs");
  sweep_cmd->add_option("--jobs", jobs, "worker threads (0 = all cores)");

  std::string model_text, verify_config;
  int trials = 100;
  std::uint64_t verify_seed = 0;
  auto* verify_cmd = app.add_subcommand("verify", "cross-check the Theta formulas on a model");
  verify_cmd->add_option("--config", verify_config, "JSON with model, trials, seed");
  verify_cmd->add_option("--model", model_text, "hopf_sl2, heisenberg_left, translations:n or JSON");
  verify_cmd->add_option("--trials", trials);
  verify_cmd->add_option("--seed", verify_seed);

  std::string classify_text;
  auto* classify_cmd = app.add_subcommand("classify", "nilpotent / solvable / non-solvable");
  classify_cmd->add_option("algebra", classify_text, "algebra spec")->required();

  std::string report_dir;
  auto* report_cmd = app.add_subcommand("report", "markdown summary of run records");
  report_cmd->add_option("dir", report_dir, "run directory");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    if (*flow_cmd) return cmd_flow(resolve_run_config(flow_cmd, flow_flags, "identity", "flow"), out, err);
    if (*sweep_cmd) {
      SweepConfig sc;
      sc.base = resolve_run_config(sweep_cmd, sweep_flags, "random_pd", "sweep");
      sc.count = count;
      sc.jobs = jobs;
      if (!sweep_flags.config.empty()) {
        const auto j = read_json_file(sweep_flags.config);
        if (j.contains("count") && !sweep_cmd->count("--count")) sc.count = j["count"].get<int>();
        if (j.contains("jobs") && !sweep_cmd->count("--jobs")) sc.jobs = j["jobs"].get<int>();
      }
      if (sc.count < 1) throw ParseError("--count must be >= 1");
      return cmd_sweep(sc, out, err);
    }
    if (*verify_cmd) {
      VerifyConfig vc;
      vc.trials = trials;
      vc.seed = verify_seed;
      bool have_model = false;
      if (!verify_config.empty()) {
        const auto j = read_json_file(verify_config);
        if (j.contains("model")) {
          vc.model = geometry::model_spec_from_json(j["model"]);
          have_model = true;
        }
        if (j.contains("trials") && !verify_cmd->count("--trials")) vc.trials = j["trials"].get<int>();
        if (j.contains("seed") && !verify_cmd->count("--seed")) vc.seed = j["seed"].get<std::uint64_t>();
      }
      if (verify_cmd->count("--model")) {
        vc.model = geometry::parse_model_spec(model_text);
        have_model = true;
      }
      if (!have_model) throw ParseError("--model is required");
      return cmd_verify(vc, out, err);
    }
    if (*classify_cmd) return cmd_classify(lie::parse_algebra_spec(classify_text), out, err);
    if (*report_cmd) {
      if (report_dir.empty()) {
        const char* env = std::getenv("HCF_OUT");
        report_dir = env && *env ? env : "hcf_out";
      }
      return cmd_report(report_dir, out, err);
    }
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace hcf::cli
