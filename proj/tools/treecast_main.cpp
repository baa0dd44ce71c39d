#include <iostream>

#include <CLI11.hpp>

#include "treecast/cli.hpp"

namespace {

constexpr const char* kConfigReference = R"(Config file keys (sectioned key = value, '#' comments):
  [network]   file            path to the edge-list topology (tail head capacity per line)
              capacity-unit   chunks | mbps (mbps converts via chunk-bytes and slot-seconds)
  [session N] source          node label
              receivers       node labels, space or comma separated
              rate            mean arrivals, chunks per slot
              rate-mbps       alternative to rate, converted like capacities
              arrivals        poisson | deterministic
  [run]       algorithm       alg1 | alg2
              selector        exact | approx-level-2 | random (random: alg2 only)
              gamma           accepted tree-cost ratio, >= 1
              eps1            regulator margin, chunks per slot (alg1)
              eps2            virtual service margin, chunks per slot (alg2)
              delta           min-cost injection probability of the pick stage (alg2)
              slots           number of time slots
              seed            master seed; all randomness derives from it
              chunk-bytes     chunk size used for unit conversion (default 262144)
              slot-seconds    slot length used for unit conversion (default 1.0)
              control-delay   selection sees costs this many slots old (default 0)
              strict-gamma    fail when a measured ratio exceeds gamma (default false)
              measure-optimality  auto | on | off (per-slot ratio / min-pick checks)
              record-hop-detail   true | false
)";

void add_override_flags(CLI::App* cmd, treecast::ScenarioOverrides* ov) {
    auto bind = [cmd](const char* flag, auto& slot, const char* help) {
        using T = typename std::decay_t<decltype(slot)>::value_type;
        cmd->add_option_function<T>(
            flag, [&slot](const T& v) { slot = v; }, help);
    };
    bind("--seed", ov->seed, "override the master seed");
    bind("--slots", ov->slots, "override the slot count");
    bind("--algorithm", ov->algorithm, "override the algorithm (alg1|alg2)");
    bind("--selector", ov->selector, "override the tree selector");
    bind("--gamma", ov->gamma, "override gamma");
    bind("--eps1", ov->eps1, "override eps1");
    bind("--eps2", ov->eps2, "override eps2");
    bind("--delta", ov->delta, "override delta");
    bind("--control-delay", ov->control_delay, "override the control delay");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Slotted simulator and oracles for content distribution over multicast trees"};
    app.require_subcommand(1);
    app.footer(kConfigReference);

    treecast::cli::RunOptions run_opt;
    CLI::App* run_cmd = app.add_subcommand("run", "execute one scenario and export CSV logs");
    run_cmd->add_option("--config", run_opt.config_path, "scenario config file")->required();
    run_cmd->add_option("--out", run_opt.out_dir, "output directory (default: out)");
    add_override_flags(run_cmd, &run_opt.overrides);

    treecast::cli::SweepOptions sweep_opt;
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "run a rate multiplier x seed grid and tabulate verdicts");
    sweep_cmd->add_option("--config", sweep_opt.base.config_path, "scenario config file")->required();
    sweep_cmd->add_option("--out", sweep_opt.base.out_dir, "output directory (default: out)");
    sweep_cmd->add_option("--multipliers", sweep_opt.multipliers, "rate multipliers")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--seeds", sweep_opt.seeds, "seeds")->required()->delimiter(',');
    sweep_cmd->add_option("--parallel", sweep_opt.parallel, "worker threads (default 1)");
    add_override_flags(sweep_cmd, &sweep_opt.base.overrides);

    treecast::cli::OracleOptions oracle_opt;
    CLI::App* oracle_cmd = app.add_subcommand("oracle", "desk-scale oracles over a scenario");
    oracle_cmd->add_option("kind", oracle_opt.kind, "region | steiner | loynes")->required();
    oracle_cmd->add_option("--config", oracle_opt.config_path, "scenario config file")->required();
    oracle_cmd->add_option("--cost-seed", oracle_opt.cost_seed,
                           "steiner: seed for random integer link costs (0 = unit costs)");
    add_override_flags(oracle_cmd, &oracle_opt.overrides);

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) return treecast::cli::cmd_run(run_opt, std::cout, std::cerr);
    if (sweep_cmd->parsed()) return treecast::cli::cmd_sweep(sweep_opt, std::cout, std::cerr);
    if (oracle_cmd->parsed()) return treecast::cli::cmd_oracle(oracle_opt, std::cout, std::cerr);
    return treecast::cli::kFailure;
}
