// specest: synthesize spectral measurements, run ESPRIT, benchmark the
// error scaling and run the analysis oracle suites.
//
// Exit codes: 0 ok, 1 I/O, 2 config or precondition, 3 numerical failure
// (including verify suites that report failures).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "specest/experiments.hpp"
#include "specest/signal_io.hpp"
#include "specest/verify.hpp"

using namespace specest;

namespace {

enum Exit : int { kOk = 0, kIo = 1, kConfig = 2, kNumerical = 3 };

int exit_code_for(Errc c) {
  switch (c) {
    case Errc::IoError:
      return kIo;
    case Errc::ConvergenceFailure:
    case Errc::RankDeficient:
    case Errc::RankDeficientUpBlock:
    case Errc::SolverFailure:
    case Errc::NotOrthonormal:
      return kNumerical;
    default:
      return kConfig;
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw Error(Errc::IoError, "cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw Error(Errc::IoError, "write to '" + path + "' failed");
}

// Prints to stdout when no path is given.
void emit_json(const nlohmann::json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_text(path, j.dump(2) + '\n');
  }
}

int cmd_synth(const std::string& config_path, const std::string& out_path, std::optional<std::uint64_t> seed) {
  auto cfg = parse_measure_config(read_json_file(config_path));
  if (seed) cfg.noise.seed = *seed;
  const auto m = cfg.measure();
  const auto g = add_noise(synthesize(m, cfg.n), sample_noise(cfg.n, cfg.noise));
  write_signal_file(out_path, g);
  std::cout << "n = " << cfg.n << "\n"
            << "separation = " << format_double(m.separation()) << "\n"
            << "tail_mass = " << format_double(m.tail_mass()) << "\n";
  return kOk;
}

nlohmann::json result_json(const EstimationResult& res) {
  auto z = nlohmann::json::array();
  for (const auto& x : res.z_hat) z.push_back({{"re", x.real()}, {"im", x.imag()}});
  auto w = nlohmann::json::array();
  for (const auto& x : res.w_eigenvalues) w.push_back({{"re", x.real()}, {"im", x.imag()}});
  return {{"z_hat", z},
          {"args", res.arguments()},
          {"mu_hat", res.mu_hat},
          {"diagnostics",
           {{"solver", std::string(to_string(res.solver_used))},
            {"wall_ms", res.wall_time.count()},
            {"imag_g0", res.imag_g0},
            {"max_intensity_imag", res.max_intensity_imag},
            {"max_intensity_clamped", res.max_intensity_clamped},
            {"degenerate", res.degenerate},
            {"top_eigenvalues", res.top_eigenvalues},
            {"solver_iterations", res.solver_iterations},
            {"w_eigenvalues", w}}}};
}

int cmd_estimate(const std::string& signal_path, std::size_t r, const std::string& solver, std::uint64_t seed,
                 const std::string& out_path) {
  const auto g = read_signal_file(signal_path);
  const auto res = run_esprit(g, r, parse_solver(solver), seed);
  emit_json(result_json(res), out_path);
  return kOk;
}

int cmd_bench(const std::string& config_path, const std::string& csv_path, const std::string& json_path,
              unsigned threads, std::optional<std::uint64_t> seed) {
  auto cfg = parse_scaling_config(read_json_file(config_path));
  if (seed) cfg.base_seed = *seed;
  const auto rows = run_scaling(cfg, threads);

  const auto summary = scaling_summary(rows, cfg.statistic);
  for (const auto& p : summary["per_n"]) {
    std::cout << "n = " << p["n"] << "  median md_z = " << p["median_md_z"] << "  median md_mu = " << p["median_md_mu"]
              << '\n';
  }
  std::cout << "slope_z = " << summary["slope_z"] << "\nslope_mu = " << summary["slope_mu"]
            << "\nfailure_rate = " << summary["failure_rate"] << '\n';
  if (summary["floor_reached_z"].get<bool>()) std::cout << "location error floor reached, no slope fitted\n";

  if (!csv_path.empty()) {
    std::ofstream os(csv_path);
    if (!os) throw Error(Errc::IoError, "cannot open '" + csv_path + "' for writing");
    write_scaling_csv(os, rows);
    if (!os) throw Error(Errc::IoError, "write to '" + csv_path + "' failed");
  }
  if (!json_path.empty()) emit_json(summary, json_path);
  return kOk;
}

int cmd_verify(const std::string& suite, const std::string& json_path, std::optional<std::uint64_t> seed,
               bool break_tolerance) {
  VerifyOptions opt;
  if (seed) opt.seed = *seed;
  opt.break_tolerance = break_tolerance;
  const auto reports = run_verify_suite(suite, opt);
  for (const auto& r : reports) {
    std::cout << (r.failures ? "FAIL " : "ok   ") << r.oracle_name << "  instances=" << r.instances
              << " failures=" << r.failures << '\n';
  }
  if (!json_path.empty()) emit_json(to_json(reports), json_path);
  return total_failures(reports) == 0 ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral estimation with ESPRIT"};
  app.require_subcommand(1);

  std::string config, out, csv, json, suite = "all", signal, solver = "fast";
  std::size_t r = 1;
  std::uint64_t seed_value = 0;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  bool break_tolerance = false;

  auto* synth = app.add_subcommand("synth", "Write the signal of a measure config");
  synth->add_option("--config", config, "Measure config (JSON)")->required();
  synth->add_option("--out", out, "Signal file to write")->required();
  auto* synth_seed = synth->add_option("--seed", seed_value, "Override the noise seed");

  auto* estimate = app.add_subcommand("estimate", "Run ESPRIT on a signal file");
  estimate->add_option("signal", signal, "Signal file")->required();
  estimate->add_option("--r", r, "Number of dominant sources")->required();
  estimate->add_option("--solver", solver, "Eigensolver")->check(CLI::IsMember({"dense", "fast"}));
  estimate->add_option("--seed", seed_value, "Start-block seed for the fast solver");
  estimate->add_option("--out", out, "Result JSON (stdout if omitted)");

  auto* bench = app.add_subcommand("bench-scaling", "Sweep n and fit log-log error slopes");
  bench->add_option("--config", config, "Scaling config (JSON)")->required();
  bench->add_option("--csv", csv, "Per-trial CSV");
  bench->add_option("--json", json, "Summary JSON");
  bench->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  auto* bench_seed = bench->add_option("--seed", seed_value, "Override the base seed");

  auto* verify = app.add_subcommand("verify", "Run the analysis oracle suites");
  verify->add_option("--suite", suite, "Suite")->check(CLI::IsMember(verify_suite_names()));
  verify->add_option("--json", json, "Report JSON (stdout table only if omitted)");
  auto* verify_seed = verify->add_option("--seed", seed_value, "Suite seed");
  // Test hook: forces every check to fail.
  verify->add_flag("--break-tolerance", break_tolerance)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  auto seed_if = [&](CLI::Option* opt) -> std::optional<std::uint64_t> {
    return opt->count() ? std::optional<std::uint64_t>(seed_value) : std::nullopt;
  };
  try {
    if (*synth) return cmd_synth(config, out, seed_if(synth_seed));
    if (*estimate) return cmd_estimate(signal, r, solver, seed_value, out);
    if (*bench) return cmd_bench(config, csv, json, threads, seed_if(bench_seed));
    if (*verify) return cmd_verify(suite, json, seed_if(verify_seed), break_tolerance);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kNumerical;
  }
  return kConfig;
}
