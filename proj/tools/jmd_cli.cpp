// SPDX-License-Identifier: Apache-2.0
#include "jmd/config.hpp"
#include "jmd/eclipse.hpp"
#include "jmd/harness.hpp"
#include "jmd/verify.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace jmd;

std::string num(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    const double v = std::stod(item, &pos);
    if (pos != item.size()) throw ConfigError("--snr: cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--snr: empty list");
  return out;
}

struct Common {
  std::string config_path;
  std::string snr;
  std::optional<long> trials;
  std::optional<std::uint64_t> seed;
  std::string jammer;
  std::optional<int> threads;
  std::string output;

  void attach(CLI::App* app, bool experiment) {
    app->add_option("-c,--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "master seed");
    app->add_option("--threads", threads, "worker threads (default: JMD_THREADS or all cores)");
    if (!experiment) return;
    app->add_option("--snr", snr, "comma-separated SNR grid in dB");
    app->add_option("--trials", trials, "frames per point");
    app->add_option("--jammer", jammer, "jammer kind");
    app->add_option("-o,--output", output, "CSV output path (default: stdout)");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg = config_path.empty() ? parse_config("") : load_config(config_path);
    ConfigOverrides o;
    if (!snr.empty()) o.snr_db = parse_list(snr);
    o.trials = trials;
    o.seed = seed;
    if (!jammer.empty()) o.jammer = jammer;
    o.threads = threads;
    if (!output.empty()) o.output = output;
    apply_overrides(cfg, o);
    return cfg;
  }
};

void emit(const ExperimentConfig& cfg, const std::string& header, const std::vector<std::string>& rows) {
  std::ostringstream out;
  out << "# config=" << cfg.to_json().dump() << " build=" << build_id() << "\n" << header << "\n";
  for (const auto& r : rows) out << r << "\n";
  if (cfg.output.empty()) {
    std::cout << out.str();
    std::cout.flush();
    if (!std::cout) throw std::runtime_error("write to stdout failed");
    return;
  }
  std::ofstream f(cfg.output, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + cfg.output + "' for writing");
  f << out.str();
  if (!f) throw std::runtime_error("write to '" + cfg.output + "' failed");
}

void cmd_sweep(const ExperimentConfig& cfg) {
  const auto points = run_ber_sweep(cfg.sweep());
  std::vector<std::string> rows;
  const std::string kind(to_string(cfg.scenario.jammer.kind));
  for (const auto& p : points)
    rows.push_back(std::string(to_string(p.detector)) + "," + num(p.snr_db) + "," + kind + "," + num(p.ber) + "," +
                   num(p.ber_ci) + "," + num(p.mer) + "," + std::to_string(p.trials) + "," +
                   std::to_string(cfg.seed));
  emit(cfg, "detector,snr_db,jammer_kind,ber,ber_ci,mer,trials,seed", rows);
}

void cmd_rate(const ExperimentConfig& cfg) {
  const auto points = run_rate_tradeoff(cfg.rate());
  std::vector<std::string> rows;
  for (const auto& p : points)
    rows.push_back(std::string(to_string(p.detector)) + "," + std::to_string(p.R) + "," + num(p.r) + "," +
                   num(p.min_snr_db));
  emit(cfg, "detector,R,r,min_snr_db", rows);
}

void cmd_eclipse(const ExperimentConfig& cfg) {
  const auto& e = cfg.eclipse;
  struct Row {
    int U, w0;
  };
  std::vector<Row> grid;
  for (int U : e.U)
    for (int w0 : e.w0) grid.push_back({U, w0});
  std::vector<std::string> rows(grid.size());
  parallel_for(static_cast<long>(grid.size()), cfg.threads, [&](long i) {
    const Row& g = grid[static_cast<std::size_t>(i)];
    RandomStream rng = RandomStream::derive(cfg.seed, static_cast<std::uint64_t>(i), 0xec11);
    const CVector w = e.signal == EclipseSignal::Optimal ? optimal_jammer_signal(g.w0, e.D, e.alpha_scale, rng)
                                                         : gaussian_jammer_signal(g.w0, e.D, rng);
    double bound, approx;
    std::optional<CVector> w_T;
    if (e.mode == EclipseMode::PerfectCsi) {
      bound = pe_bound(g.U, g.w0);
      approx = pe_bound_approx(g.U, g.w0);
    } else {
      w_T = rng.complex_normal(g.U, 1);
      bound = pe_pilot_jam_bound(g.U, e.D);
      approx = g.U * std::ldexp(1.0, -e.D);
    }
    const McEstimate m = mc_eclipse_probability(g.U, e.D, w, e.mode, e.trials, rng, w_T);
    rows[static_cast<std::size_t>(i)] = std::to_string(g.U) + "," + std::to_string(e.D) + "," + std::to_string(g.w0) +
                                        "," + to_string(e.mode) + "," + num(bound) + "," + num(approx) + "," +
                                        num(m.estimate) + "," + num(m.std_error) + "," + std::to_string(m.trials);
  });
  emit(cfg, "U,D,w0,mode,bound,approx_bound,mc_estimate,stderr,trials", rows);
}

int cmd_verify(std::uint64_t seed) {
  const auto results = run_verify_suite(seed);
  bool all = true;
  for (const auto& r : results) {
    std::printf("%-4s  %-40s %7.2f s  %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds, r.detail.c_str());
    all = all && r.pass;
  }
  std::printf("%s: %zu checks\n", all ? "all passed" : "FAILED", results.size());
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jammer mitigation and data detection: experiments and checks"};
  app.require_subcommand(1);
  Common sweep_opts, rate_opts, ecl_opts, verify_opts;
  auto* sweep = app.add_subcommand("sweep", "BER/MER versus SNR");
  sweep_opts.attach(sweep, true);
  auto* rate = app.add_subcommand("rate-tradeoff", "lowest SNR meeting the MER target per training length");
  rate_opts.attach(rate, true);
  auto* ecl = app.add_subcommand("eclipse-mc", "Monte Carlo eclipse frequencies against the bounds");
  ecl_opts.attach(ecl, true);
  auto* ver = app.add_subcommand("verify", "run the invariant checks");
  verify_opts.attach(ver, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*sweep) cmd_sweep(sweep_opts.resolve());
    if (*rate) cmd_rate(rate_opts.resolve());
    if (*ecl) {
      ExperimentConfig cfg = ecl_opts.resolve();
      if (ecl_opts.trials) cfg.eclipse.trials = *ecl_opts.trials;
      cmd_eclipse(cfg);
    }
    if (*ver) return cmd_verify(verify_opts.seed.value_or(1));
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
