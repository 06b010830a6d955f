// linvit command-line runner.
//
//   linvit run <config.ini>
//   linvit compare <config.ini>
//   linvit budget --epsilon 0.2 --epsilon-llm 0.1 --S 5 --A 3 --H 3 --delta 0.05
//   linvit gen-instances --domain blocksworld --count 30 --seed 11 [--blocks 4 --steps 4]

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "linvit/harness/config.hpp"
#include "linvit/harness/experiment.hpp"
#include "linvit/planning/blocksworld.hpp"
#include "linvit/planning/gridworld.hpp"

namespace {

int report(const linvit::harness::ExperimentResult& result) {
    std::cout << "rows " << result.rows.size() << ", error rows " << result.error_rows << '\n';
    std::cout << "wrote " << result.results_file.string() << '\n';
    std::cout << "wrote " << result.summary_file.string() << '\n';
    std::cout << "wrote " << result.manifest_file.string() << '\n';
    for (const auto& row : result.rows) {
        if (row.is_error()) {
            std::cerr << "error: seed " << row.seed << " [" << row.coordinates << "]: " << row.note << '\n';
        }
    }
    return result.error_rows == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LINVIT / SLINVIT experiment toolkit"};
    app.require_subcommand(1);

    std::string run_path;
    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", run_path, "INI config path")->required()->check(CLI::ExistingFile);

    std::string compare_path;
    auto* compare = app.add_subcommand("compare", "Run a paired baseline comparison from a config file");
    compare->add_option("config", compare_path, "INI config path")->required()->check(CLI::ExistingFile);

    double epsilon = 0.2;
    double epsilon_llm = 0.1;
    int S = 1;
    int A = 1;
    int H = 1;
    double delta = 0.05;
    auto* budget = app.add_subcommand("budget", "Print the scheduled lambda and the advisory episode budget");
    budget->add_option("--epsilon", epsilon, "Target suboptimality")->required();
    budget->add_option("--epsilon-llm", epsilon_llm, "KL bound of the prior (0 = follow the prior)")->required();
    budget->add_option("--S", S, "Number of states")->required();
    budget->add_option("--A", A, "Number of actions")->required();
    budget->add_option("--H", H, "Horizon")->required();
    budget->add_option("--delta", delta, "Failure probability")->required();

    std::string domain = "blocksworld";
    int count = 10;
    std::uint64_t seed = 0;
    int blocks = 4;
    int steps = 4;
    int width = 5;
    int height = 5;
    double wall_density = 0.2;
    std::string out_path;
    auto* gen = app.add_subcommand("gen-instances", "Generate a planning instance suite");
    gen->add_option("--domain", domain, "blocksworld or gridworld")
        ->required()
        ->check(CLI::IsMember({"blocksworld", "gridworld"}));
    gen->add_option("--count", count, "Number of instances")->required();
    gen->add_option("--seed", seed, "Generator seed")->required();
    gen->add_option("--blocks", blocks, "Blocks per instance (blocksworld)");
    gen->add_option("--steps", steps, "Exact shortest-plan length; also the horizon");
    gen->add_option("--width", width, "Grid width (gridworld)");
    gen->add_option("--height", height, "Grid height (gridworld)");
    gen->add_option("--wall-density", wall_density, "Wall probability per cell (gridworld)");
    gen->add_option("-o,--output", out_path, "Output file (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            return report(linvit::harness::run_experiment(linvit::harness::load_config(run_path)));
        }
        if (*compare) {
            return report(linvit::harness::compare_baselines(linvit::harness::load_config(compare_path)));
        }
        if (*budget) {
            const auto b = linvit::harness::theorem_budget(epsilon, epsilon_llm, S, A, H, delta);
            std::cout << "lambda " << linvit::format_real(b.lambda)
                      << (std::isinf(b.lambda) ? " (follow the prior exactly)" : "") << '\n';
            std::cout << "T_advisory " << linvit::format_real(b.T_advisory) << " (constant C = 1)\n";
            return 0;
        }
        if (*gen) {
            std::ofstream file;
            if (!out_path.empty()) {
                file.open(out_path);
                if (!file) {
                    std::cerr << "cannot write " << out_path << '\n';
                    return 1;
                }
            }
            std::ostream& out = out_path.empty() ? std::cout : file;
            if (domain == "blocksworld") {
                for (const auto& inst : linvit::planning::generate_blocks_instances(blocks, steps, count, seed)) {
                    linvit::planning::write_blocks_instance(out, inst);
                    out << '\n';
                }
            } else {
                for (const auto& inst :
                     linvit::planning::generate_grid_instances(width, height, steps, count, seed, wall_density)) {
                    linvit::planning::write_grid_instance(out, inst);
                    out << '\n';
                }
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
