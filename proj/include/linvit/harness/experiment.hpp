#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <openssl/evp.h>

#include "linvit/harness/config.hpp"
#include "linvit/linvit.hpp"
#include "linvit/planning/blocksworld.hpp"
#include "linvit/planning/gridworld.hpp"
#include "linvit/planning/scripted_priors.hpp"
#include "linvit/planning/slinvit.hpp"
#include "linvit/priors.hpp"

namespace linvit::harness {

inline constexpr const char* kToolkitVersion = "linvit 1.0.0";

inline constexpr const char* kSampleRule =
    "# samples_used: linvit methods count H real transitions per episode run; "
    "search methods count every environment transition (search-tree edges, rollout steps, executed steps); "
    "greedy-prior counts its executed steps";

inline constexpr const char* kResultsHeader = "experiment,seed,coordinates,metric,value,samples_used,note";

struct ResultRow {
    std::string experiment;
    std::uint64_t seed = 0;
    std::string coordinates;
    std::string metric;
    /// Empty when the metric is undefined (e.g. target never reached).
    std::optional<double> value;
    std::uint64_t samples_used = 0;
    std::string note;

    bool is_error() const { return metric == "error"; }
};

inline std::string csv_safe(std::string text) {
    for (char& c : text) {
        if (c == ',' || c == '\n' || c == '\r') {
            c = ';';
        }
    }
    return text;
}

inline void write_row(std::ostream& out, const ResultRow& row) {
    out << csv_safe(row.experiment) << ',' << row.seed << ',' << csv_safe(row.coordinates) << ','
        << csv_safe(row.metric) << ',' << (row.value ? format_real(*row.value) : std::string()) << ','
        << row.samples_used << ',' << csv_safe(row.note) << '\n';
}

inline void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << kSampleRule << '\n' << kResultsHeader << '\n';
    for (const auto& row : rows) {
        write_row(out, row);
    }
}

inline std::optional<double> median(std::vector<double> values) {
    if (values.empty()) {
        return std::nullopt;
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

struct SummaryRow {
    std::string coordinates;
    std::string metric;
    std::optional<double> median;
    std::size_t seeds = 0;
    /// Seeds whose value was undefined.
    std::size_t missing = 0;
};

/// Median across seeds per (coordinates, metric), in first-appearance order.
inline std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
    std::vector<std::pair<std::string, std::string>> order;
    std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::size_t>> groups;
    for (const auto& row : rows) {
        if (row.is_error()) {
            continue;
        }
        const auto key = std::make_pair(row.coordinates, row.metric);
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) {
            order.push_back(key);
        }
        if (row.value) {
            it->second.first.push_back(*row.value);
        } else {
            ++it->second.second;
        }
    }
    std::vector<SummaryRow> out;
    for (const auto& key : order) {
        const auto& [values, missing] = groups.at(key);
        // A median over seeds that never reached the target is undefined once
        // half of them are missing.
        std::optional<double> med;
        if (values.size() > missing) {
            auto padded = values;
            padded.insert(padded.end(), missing, std::numeric_limits<double>::infinity());
            med = median(padded);
        }
        out.push_back({key.first, key.second, med, values.size() + missing, missing});
    }
    return out;
}

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "# median over seeds; undefined seeds count as +infinity\n";
    out << "coordinates,metric,median,seeds,missing\n";
    for (const auto& row : rows) {
        out << csv_safe(row.coordinates) << ',' << csv_safe(row.metric) << ','
            << (row.median ? format_real(*row.median) : std::string()) << ',' << row.seeds << ',' << row.missing
            << '\n';
    }
}

inline std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    detail::require(EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) == 1,
                    "sha256: digest failed");
    std::ostringstream out;
    for (unsigned int i = 0; i < length; ++i) {
        out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Advisory budget calculator

struct TheoremBudget {
    /// +infinity when epsilon_llm == 0: follow the prior exactly.
    double lambda;
    /// H^6 S A^4 log^2(HSA/delta) / epsilon^2 with the unknown constant set to 1.
    double T_advisory;
};

inline TheoremBudget theorem_budget(double epsilon, double epsilon_llm, int S, int A, int H, double delta) {
    detail::require(epsilon > 0.0, "theorem_budget: epsilon must be positive");
    detail::require(epsilon_llm >= 0.0, "theorem_budget: epsilon_llm must be nonnegative");
    detail::require(S >= 1 && A >= 1 && H >= 1, "theorem_budget: S, A, H must be positive");
    detail::require(delta > 0.0 && delta < 1.0, "theorem_budget: delta must lie in (0,1)");
    const double h = H;
    const double a = A;
    const double log_term = std::log(h * S * a / delta);
    const double T = std::pow(h, 6) * S * std::pow(a, 4) * log_term * log_term / (epsilon * epsilon);
    return {RegularizationConfig::scheduled_lambda(epsilon, epsilon_llm), T};
}

// ---------------------------------------------------------------------------
// Grid expansion

namespace experiment_detail {

using Task = std::function<std::vector<ResultRow>()>;

inline std::string real_text(double x) { return format_real(x); }

inline std::string lambda_text(const std::optional<double>& lambda) {
    return lambda ? real_text(*lambda) : std::string("schedule");
}

struct PriorPoint {
    PriorSpec spec;
    std::string coordinates;
};

/// One PriorSpec per value of the grid that the prior kind actually reads.
inline std::vector<PriorPoint> prior_points(const PriorGrid& grid) {
    std::vector<PriorPoint> out;
    auto base = [&] {
        PriorSpec spec;
        spec.kind = grid.kind;
        spec.floor = grid.floor;
        return spec;
    };
    const std::string kind = "prior=" + std::string(to_string(grid.kind));
    switch (grid.kind) {
        case PriorKind::contaminated:
            for (double alpha : grid.alphas) {
                auto spec = base();
                spec.alpha = alpha;
                out.push_back({spec, kind + ";alpha=" + real_text(alpha)});
            }
            break;
        case PriorKind::softened:
            for (double temperature : grid.temperatures) {
                auto spec = base();
                spec.temperature = temperature;
                out.push_back({spec, kind + ";temperature=" + real_text(temperature)});
            }
            break;
        case PriorKind::scripted:
            for (double quality : grid.qualities) {
                auto spec = base();
                spec.quality = quality;
                out.push_back({spec, kind + ";quality=" + real_text(quality)});
            }
            break;
        case PriorKind::uniform:
        case PriorKind::adversarial:
            out.push_back({base(), kind});
            break;
    }
    return out;
}

inline ResultRow error_row(const std::string& id, std::uint64_t seed, const std::string& coords,
                           const std::string& message) {
    return {id, seed, coords, "error", std::nullopt, 0, message};
}

/// Rows for one LINVIT run.
inline std::vector<ResultRow> linvit_rows(const std::string& id, std::uint64_t seed, const std::string& coords,
                                          const TabularMDP& mdp, const PriorSpec& spec,
                                          const std::optional<double>& lambda, int episodes, const LinvitGrid& grid,
                                          const std::filesystem::path* runlog_path) {
    const auto built = build_prior(mdp, spec);
    LinvitConfig cfg;
    cfg.episodes = episodes;
    cfg.delta = grid.delta;
    cfg.epsilon = grid.epsilon;
    cfg.epsilon_llm = built.epsilon_llm;
    cfg.bonus_scale = grid.bonus_scale;
    cfg.seed = seed;
    cfg.keep_trajectories = false;
    if (lambda) {
        cfg.regularization.lambda = *lambda;
        cfg.regularization.use_schedule = false;
    } else {
        cfg.regularization.use_schedule = true;
    }
    if (grid.stop_at_epsilon) {
        cfg.stop_gap = grid.epsilon;
    }
    const auto result = run_linvit(mdp, built.prior, cfg);
    const auto& log = result.log;
    if (runlog_path) {
        std::filesystem::create_directories(runlog_path->parent_path());
        std::ofstream out(*runlog_path, std::ios::binary);
        log.write_csv(out);
    }

    const std::uint64_t H = static_cast<std::uint64_t>(mdp.horizon());
    const std::uint64_t used = H * log.episodes.size();
    const auto& last = log.episodes.back();
    std::vector<ResultRow> rows;
    const auto hit = log.episodes_to_gap(grid.epsilon);
    rows.push_back({id, seed, coords, "episodes_to_epsilon", hit ? std::optional<double>(*hit) : std::nullopt,
                    hit ? H * static_cast<std::uint64_t>(*hit) : used, hit ? "" : "not reached within budget"});
    rows.push_back({id, seed, coords, "final_subopt_gap", last.subopt_gap, used, ""});
    rows.push_back({id, seed, coords, "final_reg_subopt_gap", last.reg_subopt_gap, used,
                    std::isfinite(log.lambda) ? "" : "lambda is infinite"});
    rows.push_back({id, seed, coords, "success", last.subopt_gap <= grid.epsilon ? 1.0 : 0.0, used,
                    "mixture gap at most epsilon"});
    rows.push_back({id, seed, coords, "lambda", log.lambda, 0, ""});
    rows.push_back({id, seed, coords, "epsilon_llm", log.epsilon_llm, 0, ""});
    return rows;
}

inline std::vector<planning::BlocksInstance> load_blocks(const InstanceSource& src) {
    if (src.file) {
        std::ifstream in(*src.file);
        detail::require(in.good(), "cannot open instance file " + src.file->string());
        return planning::read_blocks_instances(in);
    }
    return planning::generate_blocks_instances(src.blocks, src.steps, src.count, src.seed);
}

inline std::vector<planning::GridInstance> load_grids(const InstanceSource& src) {
    if (src.file) {
        std::ifstream in(*src.file);
        detail::require(in.good(), "cannot open instance file " + src.file->string());
        return planning::read_grid_instances(in);
    }
    return planning::generate_grid_instances(src.width, src.height, src.steps, src.count, src.seed,
                                             src.wall_density);
}

struct UniformActionPrior {
    int actions;

    template <class State>
    std::vector<double> operator()(int, const State&) const {
        return std::vector<double>(static_cast<std::size_t>(actions), 1.0 / actions);
    }
};

inline planning::ScriptedBlocksPrior planning_prior(const planning::BlocksWorld& env, const PriorSpec& spec,
                                                    std::uint64_t seed) {
    return planning::ScriptedBlocksPrior(env, spec.quality, seed, spec.floor);
}

inline planning::ScriptedGridPrior planning_prior(const planning::GridWorld& env, const PriorSpec& spec,
                                                  std::uint64_t seed) {
    return planning::ScriptedGridPrior(env, spec.quality, seed, spec.floor);
}

/// Per-instance and aggregate rows for one planning method over a suite.
/// `solve(env, prior)` returns a SlinvitResult.
template <class Env, class Instance, class Solve>
std::vector<ResultRow> planning_rows(const std::string& id, std::uint64_t seed, const std::string& coords,
                                     const std::vector<Instance>& instances, const PriorSpec& spec,
                                     const std::vector<int>& caps, Solve&& solve) {
    std::vector<ResultRow> rows;
    std::size_t successes = 0;
    std::vector<std::size_t> cap_successes(caps.size(), 0);
    std::uint64_t total = 0;
    for (const auto& inst : instances) {
        const Env env(inst);
        planning::SlinvitResult res;
        if (spec.kind == PriorKind::uniform) {
            res = solve(env, UniformActionPrior{env.num_actions()});
        } else {
            res = solve(env, planning_prior(env, spec, seed));
        }
        const std::string where = coords + ";instance=" + inst.id;
        rows.push_back({id, seed, where, "success", res.success ? 1.0 : 0.0, res.samples_used, ""});
        for (std::size_t c = 0; c < caps.size(); ++c) {
            const bool ok = res.success && res.samples_used <= static_cast<std::uint64_t>(caps[c]);
            cap_successes[c] += ok ? 1 : 0;
            rows.push_back({id, seed, where, "success_at_cap_" + std::to_string(caps[c]), ok ? 1.0 : 0.0,
                            std::min<std::uint64_t>(res.samples_used, static_cast<std::uint64_t>(caps[c])), ""});
        }
        successes += res.success ? 1 : 0;
        total += res.samples_used;
    }
    const double n = static_cast<double>(instances.size());
    const std::string all = coords + ";instance=all";
    rows.push_back({id, seed, all, "success_rate", successes / n, total, std::to_string(instances.size()) + " instances"});
    for (std::size_t c = 0; c < caps.size(); ++c) {
        rows.push_back({id, seed, all, "success_rate_at_cap_" + std::to_string(caps[c]), cap_successes[c] / n, total,
                        ""});
    }
    return rows;
}

struct SearchPoint {
    planning::SearchConfig search;
    std::string coordinates;
};

inline std::vector<SearchPoint> search_points(const SearchGrid& grid) {
    std::vector<SearchPoint> out;
    for (int N : grid.N) {
        for (int k : grid.k) {
            for (double lambda : grid.lambdas) {
                for (int M : grid.M) {
                    planning::SearchConfig cfg;
                    cfg.N = N;
                    cfg.k = k;
                    cfg.lambda = lambda;
                    cfg.M = M;
                    cfg.estimator = grid.estimator;
                    std::string coords = "N=" + std::to_string(N) + ";k=" + std::to_string(k) +
                                         ";lambda=" + real_text(lambda) + ";estimator=" +
                                         std::string(planning::to_string(grid.estimator));
                    if (grid.estimator == planning::EstimatorKind::monte_carlo) {
                        coords += ";M=" + std::to_string(M);
                    }
                    out.push_back({cfg, coords});
                    if (grid.estimator == planning::EstimatorKind::rule_based) {
                        break;  // M is irrelevant
                    }
                }
            }
        }
    }
    return out;
}

template <class Env, class Instance>
void planning_tasks(const ExperimentConfig& cfg, const std::vector<Instance>& instances, bool include_greedy,
                    bool include_search, std::vector<Task>& tasks) {
    const std::string& id = cfg.id;
    for (const auto& pp : prior_points(cfg.prior)) {
        if (include_greedy) {
            for (auto seed : cfg.seeds) {
                tasks.push_back([&, pp, seed]() -> std::vector<ResultRow> {
                    const std::string coords = "method=greedy-prior;" + pp.coordinates;
                    try {
                        return planning_rows<Env>(id, seed, coords, instances, pp.spec, cfg.search.sample_caps,
                                                  [](const Env& env, const auto& prior) {
                                                      return planning::run_greedy_prior(env, prior);
                                                  });
                    } catch (const std::exception& e) {
                        return {error_row(id, seed, coords, e.what())};
                    }
                });
            }
        }
        if (!include_search) {
            continue;
        }
        for (const auto& sp : search_points(cfg.search)) {
            for (auto seed : cfg.seeds) {
                tasks.push_back([&, pp, sp, seed]() -> std::vector<ResultRow> {
                    const std::string coords = "method=slinvit;" + pp.coordinates + ";" + sp.coordinates;
                    try {
                        return planning_rows<Env>(id, seed, coords, instances, pp.spec, cfg.search.sample_caps,
                                                  [&](const Env& env, const auto& prior) {
                                                      return planning::run_slinvit(env, prior, sp.search, seed);
                                                  });
                    } catch (const std::exception& e) {
                        return {error_row(id, seed, coords, e.what())};
                    }
                });
            }
        }
    }
}

/// Runs tasks on `workers` threads; results keep task order.
inline std::vector<ResultRow> run_tasks(const std::vector<Task>& tasks, int workers) {
    std::vector<std::vector<ResultRow>> slots(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            slots[i] = tasks[i]();
        }
    };
    if (workers <= 0) {
        workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), std::max<std::size_t>(tasks.size(), 1)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
    }
    std::vector<ResultRow> rows;
    for (auto& slot : slots) {
        rows.insert(rows.end(), std::make_move_iterator(slot.begin()), std::make_move_iterator(slot.end()));
    }
    return rows;
}

inline std::filesystem::path runlog_file(const ExperimentConfig& cfg, const std::string& coords, std::uint64_t seed) {
    std::string name = coords;
    for (char& c : name) {
        if (c == ';' || c == '=' || c == '/') {
            c = '_';
        }
    }
    return cfg.output / "runlogs" / (name + "_seed" + std::to_string(seed) + ".csv");
}

inline void linvit_tasks(const ExperimentConfig& cfg, const TabularMDP& mdp, std::vector<Task>& tasks,
                         const std::vector<std::string>& methods) {
    const std::string& id = cfg.id;
    auto want = [&](const char* m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };
    for (const auto& pp : prior_points(cfg.prior)) {
        for (const auto& lambda : cfg.linvit.lambdas) {
            for (int T : cfg.linvit.episodes) {
                const std::string grid = ";lambda=" + lambda_text(lambda) + ";T=" + std::to_string(T);
                if (want("linvit")) {
                    for (auto seed : cfg.seeds) {
                        tasks.push_back([&, pp, lambda, T, grid, seed]() -> std::vector<ResultRow> {
                            const std::string coords = "method=linvit;" + pp.coordinates + grid;
                            try {
                                const auto path = runlog_file(cfg, coords, seed);
                                return linvit_rows(id, seed, coords, mdp, pp.spec, lambda, T, cfg.linvit,
                                                   cfg.linvit.runlog ? &path : nullptr);
                            } catch (const std::exception& e) {
                                return {error_row(id, seed, coords, e.what())};
                            }
                        });
                    }
                }
            }
        }
        if (want("greedy-prior")) {
            for (auto seed : cfg.seeds) {
                tasks.push_back([&, pp, seed]() -> std::vector<ResultRow> {
                    const std::string coords = "method=greedy-prior;" + pp.coordinates;
                    try {
                        // Deterministic, so the seed only keeps the table paired.
                        const auto built = build_prior(mdp, pp.spec);
                        std::vector<int> actions;
                        for (int h = 0; h < mdp.horizon(); ++h) {
                            for (int s = 0; s < mdp.num_states(); ++s) {
                                actions.push_back(argmax(built.prior.row(h, s)));
                            }
                        }
                        const auto policy = StochasticPolicy::deterministic(mdp.horizon(), mdp.num_states(),
                                                                            mdp.num_actions(), actions);
                        const double gap = exact_optimal_value(mdp).V(0, mdp.initial_state()) -
                                           exact_policy_value(mdp, policy)(0, mdp.initial_state());
                        return {{id, seed, coords, "final_subopt_gap", gap, 0, "exact evaluation"},
                                {id, seed, coords, "success", gap <= cfg.linvit.epsilon ? 1.0 : 0.0, 0,
                                 "gap at most epsilon"}};
                    } catch (const std::exception& e) {
                        return {error_row(id, seed, coords, e.what())};
                    }
                });
            }
        }
    }
    if (want("uninformed")) {
        PriorSpec uniform;
        uniform.kind = PriorKind::uniform;
        uniform.floor = cfg.prior.floor;
        for (int T : cfg.linvit.episodes) {
            for (auto seed : cfg.seeds) {
                tasks.push_back([&, uniform, T, seed]() -> std::vector<ResultRow> {
                    const std::string coords = "method=uninformed;prior=uniform;lambda=0;T=" + std::to_string(T);
                    try {
                        const auto path = runlog_file(cfg, coords, seed);
                        return linvit_rows(id, seed, coords, mdp, uniform, 0.0, T, cfg.linvit,
                                           cfg.linvit.runlog ? &path : nullptr);
                    } catch (const std::exception& e) {
                        return {error_row(id, seed, coords, e.what())};
                    }
                });
            }
        }
    }
}

inline void check_methods(const std::vector<std::string>& methods, bool tabular) {
    const std::vector<std::string> known = tabular ? std::vector<std::string>{"linvit", "uninformed", "greedy-prior"}
                                                   : std::vector<std::string>{"slinvit", "greedy-prior"};
    for (const auto& m : methods) {
        detail::require(std::find(known.begin(), known.end(), m) != known.end(),
                        "config: unknown method '" + m + "' for this experiment");
    }
}

}  // namespace experiment_detail

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::vector<SummaryRow> summary;
    std::size_t error_rows = 0;
    std::filesystem::path results_file;
    std::filesystem::path summary_file;
    std::filesystem::path manifest_file;
};

/// Executes every grid point for every seed, then writes <id>.csv,
/// <id>_summary.csv and <id>_manifest.txt into the output directory.
/// Pass write_files = false to keep everything in memory.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files = true) {
    using namespace experiment_detail;
    cfg.validate();
    const bool tabular = cfg.mdp.has_value() && cfg.kind != ExperimentKind::slinvit_suite;
    if (!tabular) {
        detail::require(cfg.prior.kind == PriorKind::scripted || cfg.prior.kind == PriorKind::uniform,
                        "config: planning experiments need a scripted or uniform prior");
    }

    std::vector<std::string> methods = cfg.methods;
    if (cfg.kind == ExperimentKind::linvit_sweep) {
        methods = {"linvit"};
    } else if (cfg.kind == ExperimentKind::slinvit_suite) {
        methods = {"slinvit"};
    }
    check_methods(methods, tabular);
    auto want = [&](const char* m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };

    std::optional<TabularMDP> mdp;
    std::vector<planning::BlocksInstance> blocks;
    std::vector<planning::GridInstance> grids;
    std::vector<Task> tasks;
    if (tabular) {
        mdp = cfg.mdp->load();
        linvit_tasks(cfg, *mdp, tasks, methods);
    } else if (cfg.instances->domain == Domain::blocksworld) {
        blocks = load_blocks(*cfg.instances);
        detail::require(!blocks.empty(), "config: instance suite is empty");
        planning_tasks<planning::BlocksWorld>(cfg, blocks, want("greedy-prior"), want("slinvit"), tasks);
    } else {
        grids = load_grids(*cfg.instances);
        detail::require(!grids.empty(), "config: instance suite is empty");
        planning_tasks<planning::GridWorld>(cfg, grids, want("greedy-prior"), want("slinvit"), tasks);
    }

    ExperimentResult result;
    result.rows = run_tasks(tasks, cfg.workers);
    result.summary = summarize(result.rows);
    result.error_rows = static_cast<std::size_t>(
        std::count_if(result.rows.begin(), result.rows.end(), [](const ResultRow& r) { return r.is_error(); }));

    if (write_files) {
        std::filesystem::create_directories(cfg.output);
        result.results_file = cfg.output / (cfg.id + ".csv");
        result.summary_file = cfg.output / (cfg.id + "_summary.csv");
        result.manifest_file = cfg.output / (cfg.id + "_manifest.txt");
        std::ostringstream results;
        write_results_csv(results, result.rows);
        std::ostringstream summary;
        write_summary_csv(summary, result.summary);
        std::ofstream(result.results_file, std::ios::binary) << results.str();
        std::ofstream(result.summary_file, std::ios::binary) << summary.str();

        std::ofstream manifest(result.manifest_file, std::ios::binary);
        manifest << "toolkit " << kToolkitVersion << '\n';
        manifest << "experiment " << cfg.id << '\n';
        manifest << "kind " << to_string(cfg.kind) << '\n';
        manifest << "config_sha256 " << sha256_hex(cfg.source_text) << '\n';
        manifest << "seeds";
        for (auto s : cfg.seeds) {
            manifest << ' ' << s;
        }
        manifest << '\n';
        manifest << "rows " << result.rows.size() << '\n';
        manifest << "error_rows " << result.error_rows << '\n';
        manifest << "results " << result.results_file.filename().string() << ' ' << sha256_hex(results.str()) << '\n';
        manifest << "summary " << result.summary_file.filename().string() << ' ' << sha256_hex(summary.str()) << '\n';
    }
    return result;
}

/// Paired baseline comparison. Same as run_experiment with kind baseline-compare.
inline ExperimentResult compare_baselines(ExperimentConfig cfg, bool write_files = true) {
    cfg.kind = ExperimentKind::baseline_compare;
    if (cfg.methods.empty()) {
        cfg.methods = cfg.mdp ? std::vector<std::string>{"linvit", "uninformed", "greedy-prior"}
                              : std::vector<std::string>{"slinvit", "greedy-prior"};
    }
    return run_experiment(cfg, write_files);
}

}  // namespace linvit::harness
