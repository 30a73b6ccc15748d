// SPDX-License-Identifier: Apache-2.0
//
// fhemesh — homomorphic-encryption kernel library driver and chiplet-package
// interconnect simulator. Verbs:
//   run        compile one workload, simulate it, write a JSON report
//   sweep      run a grid of package designs, write per-point reports + CSV
//   validate   parse a config, echo the canonical key set
//   gen-trace  write a generated workload as a trace file
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fhemesh/cli/driver.hpp"

namespace cli = fhemesh::cli;
namespace sched = fhemesh::sched;

namespace {

struct CommonArgs {
  std::string config;
  std::string workload = "ks-micro";
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, const std::string& default_out) {
  cmd->add_option("--config", args.config, "configuration file (flat dotted keys)");
  cmd->add_option("--workload", args.workload,
                  "registry name (ks-micro, boot-like, sweep-unit) or trace file");
  args.out = default_out;
  cmd->add_option("--out", args.out, "output path")->capture_default_str();
  cmd->add_option("--seed", args.seed, "workload seed (overrides workload.seed)")
      ->each([&args](const std::string&) { args.seed_set = true; });
}

std::uint64_t resolved_seed(const CommonArgs& args, const cli::RunSpec& spec) {
  return args.seed_set ? args.seed : spec.seed;
}

std::string point_name(const cli::RunSpec& spec) {
  return spec.mapping + "_" + cli::duplication_name(spec.duplication);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fhemesh: RNS-CKKS kernels and a chiplet-package design simulator"};
  app.require_subcommand(1);

  CommonArgs run_args;
  std::string trace_packets;
  auto* run_cmd = app.add_subcommand("run", "simulate one workload on one package design");
  add_common(run_cmd, run_args, "report.json");
  run_cmd->add_option("--trace-packets", trace_packets,
                      "also write a CSV packet trace to this path");

  CommonArgs sweep_args;
  std::uint32_t jobs = 1;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "simulate the mapping x duplication x cores grid");
  add_common(sweep_cmd, sweep_args, "sweep-out");
  sweep_cmd->add_option("--jobs", jobs, "parallel sweep workers")->capture_default_str();

  std::string validate_config;
  auto* validate_cmd = app.add_subcommand("validate", "check a config and echo it canonically");
  validate_cmd->add_option("--config", validate_config,
                           "configuration file (flat dotted keys)");

  CommonArgs gen_args;
  auto* gen_cmd = app.add_subcommand("gen-trace", "write a generated workload as a trace file");
  add_common(gen_cmd, gen_args, "trace.txt");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const auto spec = cli::load_run_spec(run_args.config);
      const auto wl = cli::resolve_workload(spec, run_args.workload, resolved_seed(run_args, spec));
      const auto out = cli::execute_run(spec, wl, point_name(spec));
      cli::write_file(run_args.out, cli::report_to_json(out.report));
      if (!trace_packets.empty() && out.report.status == "ok")
        cli::write_packet_csv(trace_packets, out);
      if (out.report.status != "ok") {
        std::cerr << "error: " << out.report.error << "\n";
        std::cerr << "failed report written to " << run_args.out << "\n";
        return 1;
      }
      std::cout << out.report.name << ": " << out.report.sim.total_cycles << " cycles, "
                << out.report.elements_moved << " elements core-to-core, "
                << out.report.sim.hbm_bytes << " HBM bytes, energy " << out.report.energy_total
                << " J\nreport written to " << run_args.out << "\n";
      return 0;
    }
    if (sweep_cmd->parsed()) {
      const auto spec = cli::load_run_spec(sweep_args.config);
      const auto reports = cli::run_sweep(spec, sweep_args.workload,
                                          resolved_seed(sweep_args, spec), jobs, sweep_args.out);
      size_t failed = 0;
      for (const auto& r : reports) failed += r.status != "ok";
      std::cout << reports.size() << " points -> " << sweep_args.out << " (" << failed
                << " failed)\n";
      return failed == reports.size() ? 2 : 0;
    }
    if (validate_cmd->parsed()) {
      const auto spec = cli::load_run_spec(validate_config);
      for (const auto& [key, value] : spec.canonical_config())
        std::cout << key << " = " << value << "\n";
      std::cout << "ok\n";
      return 0;
    }
    if (gen_cmd->parsed()) {
      const auto spec = cli::load_run_spec(gen_args.config);
      const auto kind = sched::parse_workload_kind(gen_args.workload);
      const auto ops =
          sched::gen_workload(kind, spec.workload_level(), resolved_seed(gen_args, spec));
      cli::write_file(gen_args.out, sched::emit_trace(ops));
      std::cout << ops.size() << " ops written to " << gen_args.out << "\n";
      return 0;
    }
  } catch (const fhemesh::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
