// polymor: batch driver for interpolatory reduction of polynomial systems.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <polymor/benchmarks.hpp>
#include <polymor/cur.hpp>
#include <polymor/io.hpp>
#include <polymor/loewner.hpp>
#include <polymor/ode.hpp>
#include <polymor/transfer.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polymor;

namespace {

struct RunConfig {
  std::string command;
  std::string benchmark;
  std::string system_dir;
  std::string ref_dir;
  std::string rom_dir;
  long grid = 0;
  double freq_lo = 1e-3, freq_hi = 1e3;
  int points = 200;
  int param_points = 0;  // 0: same as points
  std::vector<double> param;
  int order = 0;  // 0: threshold-driven
  double threshold = 1e-8;
  bool one_sided = false;
  long cur_cols = 0, cur_rows = 0;
  bool lift_qb = false;
  std::string input;
  double end_time = 0;  // 0: benchmark default
  double rtol = 1e-8, atol = 1e-8;
  unsigned seed = 0;
  double fhn_epsilon = 0.015;
  std::string kind = "FL";  // tf subcommand
  std::string out_dir;
};

void to_json(json& j, const RunConfig& c) {
  j = json{{"command", c.command},
           {"benchmark", c.benchmark},
           {"system", c.system_dir},
           {"ref", c.ref_dir},
           {"rom", c.rom_dir},
           {"grid", c.grid},
           {"freq_lo", c.freq_lo},
           {"freq_hi", c.freq_hi},
           {"points", c.points},
           {"param_points", c.param_points},
           {"param", c.param},
           {"order", c.order},
           {"threshold", c.threshold},
           {"one_sided", c.one_sided},
           {"cur_cols", c.cur_cols},
           {"cur_rows", c.cur_rows},
           {"lift_qb", c.lift_qb},
           {"input", c.input},
           {"end_time", c.end_time},
           {"rtol", c.rtol},
           {"atol", c.atol},
           {"seed", c.seed},
           {"fhn_epsilon", c.fhn_epsilon},
           {"kind", c.kind},
           {"out", c.out_dir}};
}

void from_json(const json& j, RunConfig& c) {
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("command", c.command);
  get("benchmark", c.benchmark);
  get("system", c.system_dir);
  get("ref", c.ref_dir);
  get("rom", c.rom_dir);
  get("grid", c.grid);
  get("freq_lo", c.freq_lo);
  get("freq_hi", c.freq_hi);
  get("points", c.points);
  get("param_points", c.param_points);
  get("param", c.param);
  get("order", c.order);
  get("threshold", c.threshold);
  get("one_sided", c.one_sided);
  get("cur_cols", c.cur_cols);
  get("cur_rows", c.cur_rows);
  get("lift_qb", c.lift_qb);
  get("input", c.input);
  get("end_time", c.end_time);
  get("rtol", c.rtol);
  get("atol", c.atol);
  get("seed", c.seed);
  get("fhn_epsilon", c.fhn_epsilon);
  get("kind", c.kind);
  get("out", c.out_dir);
}

void write_config(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  std::ofstream out(fs::path(cfg.out_dir) / "config.json");
  out << json(cfg).dump(2) << '\n';
}

BenchmarkSpec spec_from(const RunConfig& cfg) {
  BenchmarkSpec spec = BenchmarkSpec::by_name(cfg.benchmark, cfg.grid);
  spec.fhn.epsilon = cfg.fhn_epsilon;
  return spec;
}

PolynomialSystem load_or_build(const RunConfig& cfg) {
  auto finish = [&](PolynomialSystem sys) {
    return cfg.lift_qb ? lift_cubic_to_qb(sys) : std::move(sys);
  };
  if (!cfg.system_dir.empty()) {
    if (is_parametric_dir(cfg.system_dir)) {
      if (cfg.param.empty())
        throw std::runtime_error("parametric system: pass --param to freeze it");
      const AffineParametricSystem psys = load_parametric_system(cfg.system_dir);
      return finish(psys.assemble_at(
          Eigen::Map<const VecX>(cfg.param.data(), static_cast<Index>(cfg.param.size()))));
    }
    return finish(load_system(cfg.system_dir));
  }
  if (cfg.benchmark.empty())
    throw std::runtime_error("pass --benchmark <name> or --system <dir>");
  return finish(spec_from(cfg).build());
}

InterpolationSet interpolation_for(const RunConfig& cfg, const PolynomialSystem& sys) {
  InterpolationSet iset;
  iset.mode = InterpolationSet::Mode::Tangential;
  iset.sigma = log_spaced_frequencies(cfg.freq_lo, cfg.freq_hi, cfg.points);
  fill_default_directions(iset, sys);
  return iset;
}

InterpolationSet interpolation_for(const RunConfig& cfg, const AffineParametricSystem& psys) {
  InterpolationSet iset;
  iset.mode = InterpolationSet::Mode::ParametricTangential;
  iset.sigma = log_spaced_frequencies(cfg.freq_lo, cfg.freq_hi, cfg.points);
  const int pp = cfg.param_points > 0 ? cfg.param_points : cfg.points;
  if (pp != cfg.points)
    throw std::runtime_error("parameter points must pair with frequency points one-to-one");
  iset.p = uniform_parameter_points(psys.box_lo, psys.box_hi, pp, cfg.seed);
  fill_default_directions(iset, psys);
  return iset;
}

void write_singular_values(const fs::path& path, const LoewnerPencil& pencil, bool relative) {
  CsvWriter csv(path);
  csv.header({"index", "sigma_row", "sigma_col"});
  const Index count = std::max(pencil.sv_row.size(), pencil.sv_col.size());
  const double r0 = pencil.sv_row.size() ? pencil.sv_row[0] : 1.0;
  const double c0 = pencil.sv_col.size() ? pencil.sv_col[0] : 1.0;
  for (Index i = 0; i < count; ++i) {
    const double sr = i < pencil.sv_row.size() ? pencil.sv_row[i] : 0.0;
    const double sc = i < pencil.sv_col.size() ? pencil.sv_col[i] : 0.0;
    csv.row({static_cast<double>(i + 1), relative ? sr / r0 : sr, relative ? sc / c0 : sc});
  }
}

void write_trajectory(const fs::path& path, const Trajectory& traj) {
  CsvWriter csv(path);
  std::vector<std::string> names{"t"};
  for (Index j = 0; j < traj.outputs.rows(); ++j) names.push_back("y_" + std::to_string(j + 1));
  csv.header(names);
  for (Index k = 0; k < traj.times.size(); ++k) {
    std::vector<double> row{traj.times[k]};
    for (Index j = 0; j < traj.outputs.rows(); ++j) row.push_back(traj.outputs(j, k));
    csv.row(row);
  }
}

void write_error_report(const fs::path& path, const ErrorReport& rep) {
  CsvWriter csv(path);
  std::vector<std::string> names{"t"};
  for (Index j = 0; j < rep.pointwise_rel.rows(); ++j)
    names.push_back("relerr_" + std::to_string(j + 1));
  csv.header(names);
  for (Index k = 0; k < rep.times.size(); ++k) {
    std::vector<double> row{rep.times[k]};
    for (Index j = 0; j < rep.pointwise_rel.rows(); ++j) row.push_back(rep.pointwise_rel(j, k));
    csv.row(row);
  }
}

json summary_of(const Trajectory& traj) {
  return json{{"steps", traj.steps},
              {"rejected", traj.rejected},
              {"wall_seconds", traj.wall_seconds},
              {"diverged", traj.diverged}};
}

json summary_of(const ErrorReport& rep) {
  return json{{"rel_linf", rep.rel_linf},
              {"rel_l2", rep.rel_l2},
              {"ref_diverged", rep.ref_diverged},
              {"rom_diverged", rep.rom_diverged}};
}

InputSignal input_for(const RunConfig& cfg, const PolynomialSystem& sys) {
  if (!cfg.input.empty()) return InputSignal::parse(cfg.input, sys.m);
  if (!cfg.benchmark.empty()) return spec_from(cfg).default_input();
  return InputSignal::zero(sys.m);
}

double end_time_for(const RunConfig& cfg) {
  if (cfg.end_time > 0) return cfg.end_time;
  if (!cfg.benchmark.empty()) return spec_from(cfg).default_end_time();
  return 5.0;
}

int cmd_benchmark_gen(const RunConfig& cfg) {
  if (cfg.benchmark == "chafee-param") {
    save_system(cfg.out_dir, spec_from(cfg).build_parametric());
  } else {
    save_system(cfg.out_dir, spec_from(cfg).build());
  }
  write_config(cfg);
  std::cout << "wrote " << cfg.benchmark << " system to " << cfg.out_dir << '\n';
  return 0;
}

ReduceOptions reduce_options(const RunConfig& cfg) {
  ReduceOptions opts;
  if (cfg.order > 0) opts.order = cfg.order;
  opts.tau = cfg.threshold;
  opts.one_sided = cfg.one_sided;
  return opts;
}

int cmd_reduce(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);
  ReductionResult res;

  const bool parametric = cfg.benchmark == "chafee-param" ||
                          (!cfg.system_dir.empty() && is_parametric_dir(cfg.system_dir));
  if (parametric) {
    const AffineParametricSystem psys = cfg.system_dir.empty()
                                            ? spec_from(cfg).build_parametric()
                                            : load_parametric_system(cfg.system_dir);
    res = reduce(psys, interpolation_for(cfg, psys), reduce_options(cfg));
    save_system(out / "rom", *res.prom);
  } else {
    const PolynomialSystem sys = load_or_build(cfg);
    res = reduce(sys, interpolation_for(cfg, sys), reduce_options(cfg));
    save_system(out / "rom", res.rom.to_polynomial());
    if (cfg.cur_cols > 0 && cfg.cur_rows > 0) {
      const HyperReducedSystem hyper = make_hyper_system(res, cfg.cur_cols, cfg.cur_rows);
      save_hyper(out / "rom" / "hyper", hyper.terms);
    }
  }

  write_singular_values(out / "singular_values.csv", res.pencil, /*relative=*/false);
  json timing{{"bases_ms", res.timings.bases_ms},
              {"pencil_ms", res.timings.pencil_ms},
              {"select_ms", res.timings.select_ms},
              {"assemble_ms", res.timings.assemble_ms},
              {"total_ms", res.timings.total_ms},
              {"order", res.order},
              {"raw_columns_V", res.bases.V.cols()},
              {"raw_columns_W", res.bases.W.cols()}};
  std::ofstream(out / "timings.json") << timing.dump(2) << '\n';
  write_config(cfg);
  std::cout << "reduced to order " << res.order << "; artifacts in " << cfg.out_dir << '\n';
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  IntegrateOptions io;
  io.rtol = cfg.rtol;
  io.atol = cfg.atol;
  const double T = end_time_for(cfg);

  Trajectory traj;
  if (!cfg.rom_dir.empty()) {
    const PolynomialSystem romp = load_system(cfg.rom_dir);
    const ReducedSystem rom = ReducedSystem::from_polynomial(romp);
    traj = integrate(rom, InputSignal::parse(cfg.input.empty() ? "u1" : cfg.input, rom.m), T, io);
  } else {
    const PolynomialSystem sys = load_or_build(cfg);
    traj = integrate(sys, input_for(cfg, sys), T, io);
  }
  write_trajectory(fs::path(cfg.out_dir) / "trajectory.csv", traj);
  std::ofstream(fs::path(cfg.out_dir) / "summary.json") << summary_of(traj).dump(2) << '\n';
  write_config(cfg);
  std::cout << "simulated " << traj.steps << " steps ("
            << (traj.diverged ? "diverged" : "completed") << ")\n";
  return traj.diverged ? 2 : 0;
}

int cmd_compare(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);
  IntegrateOptions io;
  io.rtol = cfg.rtol;
  io.atol = cfg.atol;
  const double T = end_time_for(cfg);
  json summary;

  // Identical explicit model paths: a zero report by construction.
  if (!cfg.ref_dir.empty() && !cfg.rom_dir.empty()) {
    const PolynomialSystem ref = load_system(cfg.ref_dir);
    const PolynomialSystem rom = load_system(cfg.rom_dir);
    const InputSignal u = InputSignal::parse(cfg.input.empty() ? "u1" : cfg.input, ref.m);
    const Trajectory a = integrate(ref, u, T, io);
    const Trajectory b = integrate(rom, u, T, io);
    const ErrorReport rep = compare(a, b);
    write_trajectory(out / "reference.csv", a);
    write_trajectory(out / "rom.csv", b);
    write_error_report(out / "error.csv", rep);
    summary["rom"] = summary_of(rep);
    std::ofstream(out / "summary.json") << summary.dump(2) << '\n';
    write_config(cfg);
    std::cout << "rel_linf = " << rep.rel_linf << '\n';
    return 0;
  }

  const PolynomialSystem sys = load_or_build(cfg);
  const InputSignal u = input_for(cfg, sys);
  const Trajectory ref = integrate(sys, u, T, io);
  write_trajectory(out / "reference.csv", ref);
  summary["reference"] = summary_of(ref);

  const bool four_way = cfg.cur_cols > 0 && cfg.cur_rows > 0 && cfg.rom_dir.empty();
  if (four_way) {
    // Two-sided and one-sided reductions, each with and without CUR.
    for (const bool one_sided : {false, true}) {
      RunConfig sub = cfg;
      sub.one_sided = one_sided;
      const ReductionResult res = reduce(sys, interpolation_for(cfg, sys), reduce_options(sub));
      const std::string tag = one_sided ? "one_sided" : "two_sided";
      const Trajectory rt = integrate(res.rom, u, T, io);
      const ErrorReport rep = compare(ref, rt);
      write_trajectory(out / (tag + ".csv"), rt);
      write_error_report(out / ("error_" + tag + ".csv"), rep);
      summary[tag] = summary_of(rep);

      const HyperReducedSystem hyper = make_hyper_system(res, cfg.cur_cols, cfg.cur_rows);
      const Trajectory ht = integrate(hyper, u, T, io);
      const ErrorReport hrep = compare(ref, ht);
      write_trajectory(out / (tag + "_cur.csv"), ht);
      write_error_report(out / ("error_" + tag + "_cur.csv"), hrep);
      summary[tag + "_cur"] = summary_of(hrep);
    }
  } else if (!cfg.rom_dir.empty()) {
    const PolynomialSystem romp = load_system(cfg.rom_dir);
    const ReducedSystem rom = ReducedSystem::from_polynomial(romp);
    const Trajectory rt = integrate(rom, u, T, io);
    const ErrorReport rep = compare(ref, rt);
    write_trajectory(out / "rom.csv", rt);
    write_error_report(out / "error.csv", rep);
    summary["rom"] = summary_of(rep);

    const fs::path hyper_dir = fs::path(cfg.rom_dir) / "hyper";
    if (fs::exists(hyper_dir / "hyper_manifest.txt")) {
      HyperReducedSystem hyper;
      hyper.base = rom;
      hyper.base.H.clear();
      hyper.terms = load_hyper(hyper_dir);
      const Trajectory ht = integrate(hyper, u, T, io);
      const ErrorReport hrep = compare(ref, ht);
      write_trajectory(out / "rom_cur.csv", ht);
      write_error_report(out / "error_cur.csv", hrep);
      summary["rom_cur"] = summary_of(hrep);
    }
  } else {
    const ReductionResult res = reduce(sys, interpolation_for(cfg, sys), reduce_options(cfg));
    const Trajectory rt = integrate(res.rom, u, T, io);
    const ErrorReport rep = compare(ref, rt);
    write_trajectory(out / "rom.csv", rt);
    write_error_report(out / "error.csv", rep);
    summary["rom"] = summary_of(rep);
  }

  std::ofstream(out / "summary.json") << summary.dump(2) << '\n';
  write_config(cfg);
  std::cout << "comparison artifacts in " << cfg.out_dir << '\n';
  return 0;
}

int cmd_svd(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  ReductionResult res;
  const bool parametric = cfg.benchmark == "chafee-param" ||
                          (!cfg.system_dir.empty() && is_parametric_dir(cfg.system_dir));
  ReduceOptions opts = reduce_options(cfg);
  opts.order = 1;  // only the pencil is of interest here
  if (parametric) {
    const AffineParametricSystem psys = cfg.system_dir.empty()
                                            ? spec_from(cfg).build_parametric()
                                            : load_parametric_system(cfg.system_dir);
    res = reduce(psys, interpolation_for(cfg, psys), opts);
  } else {
    const PolynomialSystem sys = load_or_build(cfg);
    res = reduce(sys, interpolation_for(cfg, sys), opts);
  }
  write_singular_values(fs::path(cfg.out_dir) / "singular_values.csv", res.pencil,
                        /*relative=*/true);
  write_config(cfg);
  std::cout << "relative singular values in " << cfg.out_dir << '\n';
  return 0;
}

int cmd_tf(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const PolynomialSystem sys = load_or_build(cfg);
  PhiCache cache(sys);
  const auto points = log_spaced_frequencies(cfg.freq_lo, cfg.freq_hi, cfg.points);

  CsvWriter csv(fs::path(cfg.out_dir) / "tf.csv");
  csv.header({"s_re", "s_im", "row", "col", "value_re", "value_im"});
  for (const Complex s : points) {
    CMatX F;
    if (cfg.kind == "FL") {
      F = eval_FL(cache, s);
    } else if (cfg.kind == "FH2") {
      const std::vector<Complex> tup(3, s);
      F = eval_FH(cache, 2, tup);
    } else if (cfg.kind == "FH3") {
      const std::vector<Complex> tup(4, s);
      F = eval_FH(cache, 3, tup);
    } else if (cfg.kind == "FN1") {
      const std::vector<Complex> tup(2, s);
      F = eval_FN(cache, 1, tup);
    } else {
      throw std::runtime_error("unknown transfer kind: " + cfg.kind);
    }
    for (Index i = 0; i < F.rows(); ++i)
      for (Index j = 0; j < F.cols(); ++j)
        csv.row({s.real(), s.imag(), static_cast<double>(i + 1), static_cast<double>(j + 1),
                 F(i, j).real(), F(i, j).imag()});
  }
  write_config(cfg);
  std::cout << "transfer values in " << cfg.out_dir << '\n';
  return 0;
}

void add_common(CLI::App* cmd, RunConfig& cfg, std::string& config_path) {
  cmd->add_option("--config", config_path, "JSON config file (flags take precedence)");
  cmd->add_option("--benchmark", cfg.benchmark, "chafee | chafee-param | fhn");
  cmd->add_option("--system", cfg.system_dir, "system directory to load");
  cmd->add_option("--grid", cfg.grid, "benchmark grid points");
  cmd->add_option("--seed", cfg.seed, "random seed (parameter sampling)");
  cmd->add_option("--fhn-epsilon", cfg.fhn_epsilon, "FHN epsilon override");
  cmd->add_flag("--lift-qb", cfg.lift_qb, "lift the elementwise cubic to QB form first");
  cmd->add_option("--out", cfg.out_dir, "output directory")->required();
}

void apply_config_file(CLI::App* cmd, const std::string& path, RunConfig& cfg,
                       const RunConfig& defaults, RunConfig& parsed) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  in >> j;
  RunConfig from_file = defaults;
  from_json(j, from_file);
  // Flags the user did not pass fall back to the config file.
  json parsed_j = json(parsed), file_j = json(from_file), def_j = json(defaults);
  json merged = file_j;
  for (auto it = parsed_j.begin(); it != parsed_j.end(); ++it)
    if (def_j[it.key()] != it.value()) merged[it.key()] = it.value();
  from_json(merged, cfg);
  (void)cmd;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpolatory model reduction for sparse polynomial systems"};
  app.require_subcommand(1);

  RunConfig cfg;
  const RunConfig defaults = cfg;
  std::string config_path;

  auto* bench = app.add_subcommand("benchmark", "benchmark utilities");
  bench->require_subcommand(1);
  auto* gen = bench->add_subcommand("gen", "generate a benchmark system directory");
  add_common(gen, cfg, config_path);
  gen->add_option("--name", cfg.benchmark, "alias of --benchmark");

  auto* red = app.add_subcommand("reduce", "construct a reduced-order system");
  add_common(red, cfg, config_path);
  red->add_option("--freq", [&cfg](const std::vector<std::string>& vals) {
      if (vals.size() != 2) return false;
      cfg.freq_lo = std::stod(vals[0]);
      cfg.freq_hi = std::stod(vals[1]);
      return true;
    },
    "frequency range: lo hi")->expected(2);
  red->add_option("--points", cfg.points, "number of interpolation points");
  red->add_option("--param-points", cfg.param_points, "parameter samples (parametric)");
  red->add_option("--order", cfg.order, "reduced order r (0: threshold)");
  red->add_option("--threshold", cfg.threshold, "singular-value threshold tau");
  red->add_flag("--one-sided", cfg.one_sided, "Galerkin projection W = V");
  red->add_option("--cur", [&cfg](const std::vector<std::string>& vals) {
      if (vals.size() != 2) return false;
      cfg.cur_cols = std::stol(vals[0]);
      cfg.cur_rows = std::stol(vals[1]);
      return true;
    },
    "CUR selection sizes: n_c n_r")->expected(2);

  auto* sim = app.add_subcommand("simulate", "integrate a system or ROM");
  add_common(sim, cfg, config_path);
  sim->add_option("--rom", cfg.rom_dir, "ROM directory to simulate");
  sim->add_option("--input", cfg.input, "u1 | u2 | fhn | zero | constant:<v> | table:<csv>");
  sim->add_option("--T", cfg.end_time, "end time");
  sim->add_option("--rtol", cfg.rtol, "relative tolerance");
  sim->add_option("--atol", cfg.atol, "absolute tolerance");
  sim->add_option("--param", cfg.param, "parameter value (parametric systems)");

  auto* cmp = app.add_subcommand("compare", "full vs reduced trajectories");
  add_common(cmp, cfg, config_path);
  cmp->add_option("--ref", cfg.ref_dir, "reference model directory");
  cmp->add_option("--rom", cfg.rom_dir, "ROM directory");
  cmp->add_option("--input", cfg.input, "input signal tag");
  cmp->add_option("--T", cfg.end_time, "end time");
  cmp->add_option("--rtol", cfg.rtol, "relative tolerance");
  cmp->add_option("--atol", cfg.atol, "absolute tolerance");
  cmp->add_option("--param", cfg.param, "parameter value (parametric systems)");
  cmp->add_option("--points", cfg.points, "number of interpolation points");
  cmp->add_option("--order", cfg.order, "reduced order (in-process reduction)");
  cmp->add_option("--threshold", cfg.threshold, "singular-value threshold tau");
  cmp->add_flag("--one-sided", cfg.one_sided, "Galerkin projection");
  cmp->add_option("--freq", [&cfg](const std::vector<std::string>& vals) {
      if (vals.size() != 2) return false;
      cfg.freq_lo = std::stod(vals[0]);
      cfg.freq_hi = std::stod(vals[1]);
      return true;
    },
    "frequency range: lo hi")->expected(2);
  cmp->add_option("--cur", [&cfg](const std::vector<std::string>& vals) {
      if (vals.size() != 2) return false;
      cfg.cur_cols = std::stol(vals[0]);
      cfg.cur_rows = std::stol(vals[1]);
      return true;
    },
    "CUR selection sizes (runs the four-way study)")->expected(2);

  auto* svd = app.add_subcommand("svd", "pencil singular-value decay");
  add_common(svd, cfg, config_path);
  svd->add_option("--freq", [&cfg](const std::vector<std::string>& vals) {
      if (vals.size() != 2) return false;
      cfg.freq_lo = std::stod(vals[0]);
      cfg.freq_hi = std::stod(vals[1]);
      return true;
    },
    "frequency range: lo hi")->expected(2);
  svd->add_option("--points", cfg.points, "number of interpolation points");
  svd->add_option("--param-points", cfg.param_points, "parameter samples");
  svd->add_flag("--one-sided", cfg.one_sided, "Galerkin projection");

  auto* tf = app.add_subcommand("tf", "tabulate generalized transfer values");
  add_common(tf, cfg, config_path);
  tf->add_option("--freq", [&cfg](const std::vector<std::string>& vals) {
      if (vals.size() != 2) return false;
      cfg.freq_lo = std::stod(vals[0]);
      cfg.freq_hi = std::stod(vals[1]);
      return true;
    },
    "frequency range: lo hi")->expected(2);
  tf->add_option("--points", cfg.points, "number of points");
  tf->add_option("--kind", cfg.kind, "FL | FH2 | FH3 | FN1");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig parsed = cfg;
    CLI::App* active = app.get_subcommands().front();
    apply_config_file(active, config_path, cfg, defaults, parsed);

    if (gen->parsed()) {
      cfg.command = "benchmark gen";
      return cmd_benchmark_gen(cfg);
    }
    if (red->parsed()) {
      cfg.command = "reduce";
      return cmd_reduce(cfg);
    }
    if (sim->parsed()) {
      cfg.command = "simulate";
      return cmd_simulate(cfg);
    }
    if (cmp->parsed()) {
      cfg.command = "compare";
      return cmd_compare(cfg);
    }
    if (svd->parsed()) {
      cfg.command = "svd";
      return cmd_svd(cfg);
    }
    if (tf->parsed()) {
      cfg.command = "tf";
      return cmd_tf(cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "polymor: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
