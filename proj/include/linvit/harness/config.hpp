#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "linvit/errors.hpp"
#include "linvit/planning/slinvit.hpp"
#include "linvit/priors.hpp"
#include "linvit/tabular.hpp"

// Experiment configuration: an INI file (sections of key = value).
//
//   [experiment]  kind, id, seeds, output, workers
//   [mdp]         file | states, actions, horizon, branching, sparsity, seed
//   [prior]       kind, alpha, temperature, quality, floor
//   [linvit]      lambda, epsilon, delta, episodes, bonus_scale, stop_at_epsilon, runlog
//   [instances]   domain, file | blocks, steps, count, seed, width, height, wall_density
//   [search]      N, k, lambda, M, estimator, sample_caps
//   [baselines]   methods
//
// List-valued keys take comma-separated values; integer lists also accept
// inclusive ranges such as "1..20". The only environment override is
// LINVIT_OUTPUT_DIR, which replaces [experiment] output.

namespace linvit::harness {

enum class ExperimentKind { linvit_sweep, slinvit_suite, baseline_compare };

inline std::string_view to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::linvit_sweep: return "linvit-sweep";
        case ExperimentKind::slinvit_suite: return "slinvit-suite";
        case ExperimentKind::baseline_compare: return "baseline-compare";
    }
    return "unknown";
}

inline ExperimentKind parse_experiment_kind(std::string_view name) {
    for (auto kind : {ExperimentKind::linvit_sweep, ExperimentKind::slinvit_suite, ExperimentKind::baseline_compare}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw ConfigurationError("unknown experiment kind '" + std::string(name) + "'");
}

struct MdpSource {
    std::optional<std::filesystem::path> file;
    RandomMdpOptions generator{5, 3, 3, 2, 0.0, false};
    std::uint64_t seed = 7;

    TabularMDP load() const {
        if (file) {
            std::ifstream in(*file);
            detail::require(in.good(), "cannot open MDP file " + file->string());
            return read_mdp(in);
        }
        return random_mdp(generator, seed);
    }
};

struct PriorGrid {
    PriorKind kind = PriorKind::contaminated;
    std::vector<double> alphas{1.0};
    std::vector<double> temperatures{1.0};
    std::vector<double> qualities{1.0};
    double floor = kDefaultPriorFloor;
};

struct LinvitGrid {
    /// Empty optional entry = the theorem schedule.
    std::vector<std::optional<double>> lambdas{std::nullopt};
    double epsilon = 0.2;
    double delta = 0.05;
    std::vector<int> episodes{10000};
    double bonus_scale = 1.0;
    bool stop_at_epsilon = false;
    bool runlog = false;
};

enum class Domain { blocksworld, gridworld };

struct InstanceSource {
    Domain domain = Domain::blocksworld;
    std::optional<std::filesystem::path> file;
    int blocks = 4;
    int steps = 4;
    int count = 30;
    std::uint64_t seed = 11;
    int width = 5;
    int height = 5;
    double wall_density = 0.2;
};

struct SearchGrid {
    std::vector<int> N{1};
    std::vector<int> k{1};
    std::vector<double> lambdas{1.0};
    std::vector<int> M{1};
    planning::EstimatorKind estimator = planning::EstimatorKind::rule_based;
    std::vector<int> sample_caps;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::linvit_sweep;
    std::string id = "experiment";
    std::vector<std::uint64_t> seeds;
    std::filesystem::path output = "results";
    int workers = 0;
    std::optional<MdpSource> mdp;
    PriorGrid prior;
    LinvitGrid linvit;
    std::optional<InstanceSource> instances;
    SearchGrid search;
    std::vector<std::string> methods;
    /// Raw file contents; hashed into the manifest.
    std::string source_text;

    void validate() const {
        detail::require(!seeds.empty(), "config: seed list is empty");
        detail::require(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() == seeds.size(),
                        "config: seeds must be distinct");
        const bool tabular = kind == ExperimentKind::linvit_sweep ||
                             (kind == ExperimentKind::baseline_compare && mdp.has_value());
        if (tabular) {
            detail::require(mdp.has_value(), "config: [mdp] section is required");
            detail::require(!linvit.lambdas.empty() && !linvit.episodes.empty(), "config: [linvit] grids are empty");
            detail::require(prior.kind != PriorKind::scripted, "config: scripted priors need planning instances");
        } else {
            detail::require(instances.has_value(), "config: [instances] section is required");
            detail::require(!search.N.empty() && !search.k.empty() && !search.lambdas.empty() && !search.M.empty(),
                            "config: [search] grids are empty");
        }
        detail::require(!prior.alphas.empty() && !prior.temperatures.empty() && !prior.qualities.empty(),
                        "config: [prior] grids are empty");
        if (kind == ExperimentKind::baseline_compare) {
            detail::require(!methods.empty(), "config: [baselines] methods is empty");
        }
        if (mdp && mdp->file) {
            detail::require(std::filesystem::exists(*mdp->file), "config: missing file " + mdp->file->string());
        }
        if (instances && instances->file) {
            detail::require(std::filesystem::exists(*instances->file),
                            "config: missing file " + instances->file->string());
        }
    }
};

namespace config_detail {

inline std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            items.push_back(item);
        }
    }
    return items;
}

inline std::vector<std::int64_t> parse_int_list(const std::string& text) {
    std::vector<std::int64_t> out;
    for (const auto& item : split_list(text)) {
        if (const auto dots = item.find(".."); dots != std::string::npos) {
            const auto lo = detail::parse_int(trim(item.substr(0, dots)));
            const auto hi = detail::parse_int(trim(item.substr(dots + 2)));
            detail::require(lo <= hi, "config: empty range '" + item + "'");
            for (auto v = lo; v <= hi; ++v) {
                out.push_back(v);
            }
        } else {
            out.push_back(detail::parse_int(item));
        }
    }
    return out;
}

inline std::vector<double> parse_real_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) {
        out.push_back(detail::parse_real(item));
    }
    return out;
}

inline bool parse_bool(const std::string& text) {
    const auto t = trim(text);
    if (t == "true" || t == "yes" || t == "1" || t == "on") {
        return true;
    }
    if (t == "false" || t == "no" || t == "0" || t == "off") {
        return false;
    }
    throw ConfigurationError("config: expected a boolean, got '" + t + "'");
}

using Tree = boost::property_tree::ptree;

inline std::optional<std::string> get(const Tree& tree, const std::string& section, const std::string& key) {
    const auto sec = tree.get_child_optional(section);
    if (!sec) {
        return std::nullopt;
    }
    const auto value = sec->get_optional<std::string>(key);
    if (!value) {
        return std::nullopt;
    }
    // Strip trailing ';' comments.
    auto text = *value;
    if (const auto semi = text.find(';'); semi != std::string::npos) {
        text.erase(semi);
    }
    return trim(text);
}

template <class T>
std::vector<T> to_ints(const std::vector<std::int64_t>& values) {
    return {values.begin(), values.end()};
}

}  // namespace config_detail

/// Parses an experiment config from INI text. Relative file paths resolve
/// against `base_dir`.
inline ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".") {
    using namespace config_detail;
    Tree tree;
    try {
        std::istringstream in(text);
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigurationError(std::string("config: ") + e.what());
    }

    ExperimentConfig cfg;
    cfg.source_text = text;
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : (base_dir / path).lexically_normal();
    };

    const auto kind = get(tree, "experiment", "kind");
    detail::require(kind.has_value(), "config: [experiment] kind is required");
    cfg.kind = parse_experiment_kind(*kind);
    if (auto v = get(tree, "experiment", "id")) cfg.id = *v;
    if (auto v = get(tree, "experiment", "seeds")) {
        for (auto s : parse_int_list(*v)) {
            detail::require(s >= 0, "config: seeds must be nonnegative");
            cfg.seeds.push_back(static_cast<std::uint64_t>(s));
        }
    }
    if (auto v = get(tree, "experiment", "output")) cfg.output = resolve(*v);
    if (auto v = get(tree, "experiment", "workers")) cfg.workers = detail::parse_int(*v);

    if (tree.get_child_optional("mdp")) {
        MdpSource src;
        if (auto v = get(tree, "mdp", "file")) src.file = resolve(*v);
        if (auto v = get(tree, "mdp", "states")) src.generator.num_states = detail::parse_int(*v);
        if (auto v = get(tree, "mdp", "actions")) src.generator.num_actions = detail::parse_int(*v);
        if (auto v = get(tree, "mdp", "horizon")) src.generator.horizon = detail::parse_int(*v);
        if (auto v = get(tree, "mdp", "branching")) src.generator.branching = detail::parse_int(*v);
        if (auto v = get(tree, "mdp", "sparsity")) src.generator.reward_sparsity = detail::parse_real(*v);
        if (auto v = get(tree, "mdp", "deterministic")) src.generator.deterministic = parse_bool(*v);
        if (auto v = get(tree, "mdp", "seed")) src.seed = static_cast<std::uint64_t>(detail::parse_int(*v));
        cfg.mdp = src;
    }

    if (auto v = get(tree, "prior", "kind")) cfg.prior.kind = parse_prior_kind(*v);
    if (auto v = get(tree, "prior", "alpha")) cfg.prior.alphas = parse_real_list(*v);
    if (auto v = get(tree, "prior", "temperature")) cfg.prior.temperatures = parse_real_list(*v);
    if (auto v = get(tree, "prior", "quality")) cfg.prior.qualities = parse_real_list(*v);
    if (auto v = get(tree, "prior", "floor")) cfg.prior.floor = detail::parse_real(*v);

    if (auto v = get(tree, "linvit", "lambda")) {
        cfg.linvit.lambdas.clear();
        for (const auto& item : split_list(*v)) {
            if (item == "schedule") {
                cfg.linvit.lambdas.emplace_back(std::nullopt);
            } else {
                cfg.linvit.lambdas.emplace_back(detail::parse_real(item));
            }
        }
    }
    if (auto v = get(tree, "linvit", "epsilon")) cfg.linvit.epsilon = detail::parse_real(*v);
    if (auto v = get(tree, "linvit", "delta")) cfg.linvit.delta = detail::parse_real(*v);
    if (auto v = get(tree, "linvit", "episodes")) cfg.linvit.episodes = to_ints<int>(parse_int_list(*v));
    if (auto v = get(tree, "linvit", "bonus_scale")) cfg.linvit.bonus_scale = detail::parse_real(*v);
    if (auto v = get(tree, "linvit", "stop_at_epsilon")) cfg.linvit.stop_at_epsilon = parse_bool(*v);
    if (auto v = get(tree, "linvit", "runlog")) cfg.linvit.runlog = parse_bool(*v);

    if (tree.get_child_optional("instances")) {
        InstanceSource src;
        if (auto v = get(tree, "instances", "domain")) {
            if (*v == "blocksworld") {
                src.domain = Domain::blocksworld;
            } else if (*v == "gridworld") {
                src.domain = Domain::gridworld;
            } else {
                throw ConfigurationError("config: unknown domain '" + *v + "'");
            }
        }
        if (auto v = get(tree, "instances", "file")) src.file = resolve(*v);
        if (auto v = get(tree, "instances", "blocks")) src.blocks = detail::parse_int(*v);
        if (auto v = get(tree, "instances", "steps")) src.steps = detail::parse_int(*v);
        if (auto v = get(tree, "instances", "count")) src.count = detail::parse_int(*v);
        if (auto v = get(tree, "instances", "seed")) src.seed = static_cast<std::uint64_t>(detail::parse_int(*v));
        if (auto v = get(tree, "instances", "width")) src.width = detail::parse_int(*v);
        if (auto v = get(tree, "instances", "height")) src.height = detail::parse_int(*v);
        if (auto v = get(tree, "instances", "wall_density")) src.wall_density = detail::parse_real(*v);
        cfg.instances = src;
    }

    if (auto v = get(tree, "search", "N")) cfg.search.N = to_ints<int>(parse_int_list(*v));
    if (auto v = get(tree, "search", "k")) cfg.search.k = to_ints<int>(parse_int_list(*v));
    if (auto v = get(tree, "search", "lambda")) cfg.search.lambdas = parse_real_list(*v);
    if (auto v = get(tree, "search", "M")) cfg.search.M = to_ints<int>(parse_int_list(*v));
    if (auto v = get(tree, "search", "estimator")) cfg.search.estimator = planning::parse_estimator_kind(*v);
    if (auto v = get(tree, "search", "sample_caps")) cfg.search.sample_caps = to_ints<int>(parse_int_list(*v));

    if (auto v = get(tree, "baselines", "methods")) cfg.methods = split_list(*v);

    if (const char* dir = std::getenv("LINVIT_OUTPUT_DIR"); dir && *dir) {
        cfg.output = dir;
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    detail::require(in.good(), "cannot open config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

}  // namespace linvit::harness
