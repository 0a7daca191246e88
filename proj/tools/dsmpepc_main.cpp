#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsmpepc/cli.hpp"

namespace {

std::optional<dsmpepc::CostMode> mode_option(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return dsmpepc::parse_cost_mode(s);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace dsmpepc::cli;
  CLI::App app{"DS-MPEPC navigation simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("--out", out_dir, std::string("output directory (default: $") + kOutDirEnv + " or dsmpepc_out)");
  app.add_option("--seed", seed, "scenario seed override");

  RunOptions run_opt;
  std::string run_mode;
  auto* run = app.add_subcommand("run", "simulate a scenario file or builtin");
  run->add_option("scenario", run_opt.scenario, "scenario JSON path or builtin name")->required();
  run->add_option("--mode", run_mode, "cost mode: ds or mpepc (default: per scenario)")
      ->check(CLI::IsMember({"ds", "ds_mpepc", "mpepc", "baseline", "baseline_mpepc"}));
  run->add_option("-p,--param", run_opt.params, "builtin parameter key=value (repeatable)");
  run->add_flag("--svg", run_opt.svg, "write an SVG rendering");
  run->add_flag("--csv", run_opt.csv, "write per-agent trace CSVs");
  run->add_flag("--diag", run_opt.diag, "record candidates and draw them in the SVG");

  CompareOptions cmp_opt;
  auto* compare = app.add_subcommand("compare", "run both cost modes over several seeds");
  compare->add_option("scenario", cmp_opt.scenario, "scenario JSON path or builtin name")->required();
  compare->add_option("--seeds", cmp_opt.seeds, "number of seeds")->check(CLI::PositiveNumber);
  compare->add_option("-p,--param", cmp_opt.params, "builtin parameter key=value (repeatable)");

  LandscapeOptions land_opt;
  std::string land_mode;
  auto* landscape = app.add_subcommand("landscape", "rank one planning cycle's candidates");
  landscape->add_option("scenario", land_opt.scenario, "scenario JSON path or builtin name")->required();
  landscape->add_option("--agent", land_opt.agent, "agent id (default: first agent)");
  landscape->add_option("--t", land_opt.t, "snapshot time in seconds");
  landscape->add_option("--rank", land_opt.rank, "cost, ttg or ttc")->check(CLI::IsMember({"cost", "ttg", "ttc"}));
  landscape->add_option("--top", land_opt.top, "number of trajectories to render");
  landscape->add_option("--mode", land_mode, "cost mode: ds or mpepc")
      ->check(CLI::IsMember({"ds", "ds_mpepc", "mpepc", "baseline", "baseline_mpepc"}));
  landscape->add_option("-p,--param", land_opt.params, "builtin parameter key=value (repeatable)");

  auto* list = app.add_subcommand("list-builtins", "list builtin scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitLoadError;
  }

  if (run->parsed()) {
    run_opt.out_dir = out_dir;
    run_opt.seed = seed;
    run_opt.mode = mode_option(run_mode);
    return cmd_run(run_opt, std::cout, std::cerr);
  }
  if (compare->parsed()) {
    cmp_opt.out_dir = out_dir;
    if (seed) cmp_opt.base_seed = *seed;
    return cmd_compare(cmp_opt, std::cout, std::cerr);
  }
  if (landscape->parsed()) {
    land_opt.out_dir = out_dir;
    land_opt.seed = seed;
    land_opt.mode = mode_option(land_mode);
    return cmd_landscape(land_opt, std::cout, std::cerr);
  }
  if (list->parsed()) return cmd_list_builtins(std::cout);
  return kExitLoadError;
}
