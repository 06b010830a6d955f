#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "linvit/dynamic_programming.hpp"
#include "linvit/errors.hpp"
#include "linvit/random.hpp"
#include "linvit/regularized.hpp"
#include "linvit/tabular.hpp"

// Online learner: count-based transition estimates with a Hoeffding-style
// bonus, optimistic/pessimistic KL-regularized planning, and a mixed
// exploration policy. The returned policy is the uniform mixture of the
// per-episode regularized-greedy policies.

namespace linvit {

/// Visit counts, estimated transitions and bonuses for every (h, s, a).
///
/// u_h(s,a) = min{ 2H, c_b * A * H * sqrt( log(4 H T S^2 A / delta) / n ) },
/// with u = 2H and a uniform transition row while n = 0.
class EmpiricalModel {
public:
    EmpiricalModel(int horizon, int num_states, int num_actions, int budget, double delta,
                   double bonus_scale = 1.0)
        : H_(horizon), S_(num_states), A_(num_actions), budget_(budget), delta_(delta),
          bonus_scale_(bonus_scale) {
        detail::require(H_ > 0 && S_ > 0 && A_ > 0, "EmpiricalModel: dimensions must be positive");
        detail::require(budget_ >= 1, "EmpiricalModel: episode budget must be at least 1");
        detail::require(delta_ > 0.0 && delta_ < 1.0, "EmpiricalModel: delta must lie in (0,1)");
        detail::require(bonus_scale_ > 0.0, "EmpiricalModel: bonus scale must be positive");
        const auto cells = static_cast<std::size_t>(H_) * S_ * A_;
        n_sa_.assign(cells, 0);
        n_sas_.assign(cells * S_, 0);
        p_hat_.assign(cells * S_, 1.0 / S_);
        bonus_.assign(cells, 2.0 * H_);
        log_term_ = std::log(4.0 * H_ * static_cast<double>(budget_) * S_ * S_ * A_ / delta_);
    }

    static EmpiricalModel for_mdp(const TabularMDP& mdp, int budget, double delta, double bonus_scale = 1.0) {
        return {mdp.horizon(), mdp.num_states(), mdp.num_actions(), budget, delta, bonus_scale};
    }

    /// Adds the trajectory's transitions; only touched cells are refreshed.
    void record(const Trajectory& traj) {
        for (const auto& step : traj.steps) {
            detail::require(step.h >= 0 && step.h < H_ && step.state >= 0 && step.state < S_ &&
                                step.action >= 0 && step.action < A_ && step.next_state >= 0 &&
                                step.next_state < S_,
                            "EmpiricalModel: trajectory index out of range");
            const auto c = cell(step.h, step.state, step.action);
            ++n_sa_[c];
            ++n_sas_[c * S_ + step.next_state];
            refresh(c);
        }
        ++episodes_;
    }

    int horizon() const { return H_; }
    int num_states() const { return S_; }
    int num_actions() const { return A_; }
    int budget() const { return budget_; }
    double delta() const { return delta_; }
    double bonus_scale() const { return bonus_scale_; }
    int episodes() const { return episodes_; }

    std::int64_t count(int h, int s, int a) const { return n_sa_[cell(h, s, a)]; }
    std::int64_t count(int h, int s, int a, int next) const { return n_sas_[cell(h, s, a) * S_ + next]; }

    std::span<const double> transition(int h, int s, int a) const {
        return {p_hat_.data() + cell(h, s, a) * S_, static_cast<std::size_t>(S_)};
    }

    double bonus(int h, int s, int a) const { return bonus_[cell(h, s, a)]; }

    /// log(4 H T S^2 A / delta).
    double log_term() const { return log_term_; }

    double bonus_for_count(std::int64_t n) const {
        const double cap = 2.0 * H_;
        if (n <= 0) {
            return cap;
        }
        const double b = bonus_scale_ * A_ * H_ * std::sqrt(log_term_ / static_cast<double>(n));
        return std::min(cap, b);
    }

private:
    std::size_t cell(int h, int s, int a) const { return (static_cast<std::size_t>(h) * S_ + s) * A_ + a; }

    void refresh(std::size_t c) {
        const auto n = n_sa_[c];
        for (int sp = 0; sp < S_; ++sp) {
            p_hat_[c * S_ + sp] = static_cast<double>(n_sas_[c * S_ + sp]) / static_cast<double>(n);
        }
        bonus_[c] = bonus_for_count(n);
    }

    int H_;
    int S_;
    int A_;
    int budget_;
    double delta_;
    double bonus_scale_;
    int episodes_ = 0;
    double log_term_ = 0.0;
    std::vector<std::int64_t> n_sa_;
    std::vector<std::int64_t> n_sas_;
    std::vector<double> p_hat_;
    std::vector<double> bonus_;
};

inline EmpiricalModel update_model(EmpiricalModel model, const Trajectory& traj) {
    model.record(traj);
    return model;
}

/// Optimistic (hi) and pessimistic (lo) regularized value estimates; every
/// entry lies in [0, H] and row H is zero.
struct ValueBounds {
    ActionTable Q_hi;
    StateTable V_hi;
    ActionTable Q_lo;
    StateTable V_lo;

    int horizon() const { return V_hi.steps() - 1; }
    int num_states() const { return V_hi.states(); }
    int num_actions() const { return Q_hi.actions(); }

    /// max over acting steps of Q_hi - Q_lo.
    double max_gap() const {
        double gap = 0.0;
        const auto n = static_cast<std::size_t>(horizon()) * num_states() * num_actions();
        for (std::size_t i = 0; i < n; ++i) {
            gap = std::max(gap, Q_hi.data()[i] - Q_lo.data()[i]);
        }
        return gap;
    }
};

/// Backward induction of the clipped optimistic and pessimistic backups.
/// Only the MDP's rewards are read; transitions come from the model.
inline ValueBounds plan_bounds(const EmpiricalModel& model, const TabularMDP& mdp, const PolicyPrior& prior,
                               double lambda) {
    detail::require(model.horizon() == mdp.horizon() && model.num_states() == mdp.num_states() &&
                        model.num_actions() == mdp.num_actions(),
                    "plan_bounds: model dimensions do not match the MDP");
    detail::require(prior.matches(mdp), "plan_bounds: prior dimensions do not match the MDP");
    detail::require_lambda(lambda);
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const int H = mdp.horizon();
    const double top = static_cast<double>(H);
    ValueBounds b{ActionTable(H + 1, S, A), StateTable(H + 1, S), ActionTable(H + 1, S, A), StateTable(H + 1, S)};
    for (int h = H - 1; h >= 0; --h) {
        const auto next_hi = b.V_hi.row(h + 1);
        const auto next_lo = b.V_lo.row(h + 1);
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                const auto p = model.transition(h, s, a);
                const double r = mdp.reward(h, s, a);
                const double u = model.bonus(h, s, a);
                b.Q_hi(h, s, a) = clip_value(r + detail::expected_next(p, next_hi) + u, 0.0, top);
                b.Q_lo(h, s, a) = clip_value(r + detail::expected_next(p, next_lo) - u, 0.0, top);
            }
            b.V_hi(h, s) = softmax_value(b.Q_hi.row(h, s), prior.row(h, s), lambda);
            b.V_lo(h, s) = softmax_value(b.Q_lo.row(h, s), prior.row(h, s), lambda);
        }
    }
    return b;
}

/// The regularized-greedy policy w.r.t. Q_hi (the recorded mixture component).
inline StochasticPolicy optimistic_greedy_policy(const ValueBounds& bounds, const PolicyPrior& prior, double lambda) {
    const int H = bounds.horizon();
    const int S = bounds.num_states();
    const int A = bounds.num_actions();
    std::vector<double> probs(static_cast<std::size_t>(H) * S * A);
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
            softmax_policy(bounds.Q_hi.row(h, s), prior.row(h, s), lambda,
                           std::span<double>(probs.data() + (static_cast<std::size_t>(h) * S + s) * A,
                                             static_cast<std::size_t>(A)));
        }
    }
    return {H, S, A, std::move(probs)};
}

/// Per (h, s): weight 1/H on argmax_a (Q_hi - Q_lo), weight (H-1)/H on the
/// regularized-greedy row.
inline StochasticPolicy exploration_policy(const ValueBounds& bounds, const PolicyPrior& prior, double lambda) {
    const int H = bounds.horizon();
    const int S = bounds.num_states();
    const int A = bounds.num_actions();
    detail::require(prior.horizon() == H && prior.num_states() == S && prior.num_actions() == A,
                    "exploration_policy: prior dimensions do not match the bounds");
    const double explore = 1.0 / H;
    const double exploit = static_cast<double>(H - 1) / H;
    std::vector<double> probs(static_cast<std::size_t>(H) * S * A);
    std::vector<double> gap(static_cast<std::size_t>(A));
    std::vector<double> greedy(static_cast<std::size_t>(A));
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                gap[a] = bounds.Q_hi(h, s, a) - bounds.Q_lo(h, s, a);
            }
            softmax_policy(bounds.Q_hi.row(h, s), prior.row(h, s), lambda, greedy);
            const int widest = argmax(gap);
            double* row = probs.data() + (static_cast<std::size_t>(h) * S + s) * A;
            for (int a = 0; a < A; ++a) {
                row[a] = exploit * greedy[a] + (a == widest ? explore : 0.0);
            }
        }
    }
    return {H, S, A, std::move(probs)};
}

/// Uniform mixture: one component is drawn per episode and followed throughout.
struct MixturePolicy {
    std::vector<StochasticPolicy> components;
};

/// Mean over components of V^component at (0, s1).
inline double evaluate_mixture(const TabularMDP& mdp, const MixturePolicy& mix) {
    detail::require(!mix.components.empty(), "evaluate_mixture: mixture is empty");
    double total = 0.0;
    for (const auto& component : mix.components) {
        total += exact_policy_value(mdp, component)(0, mdp.initial_state());
    }
    return total / static_cast<double>(mix.components.size());
}

struct LinvitConfig {
    int episodes = 1000;
    double delta = 0.05;
    RegularizationConfig regularization{};
    /// Target precision; only consulted by the lambda schedule.
    double epsilon = 0.2;
    /// KL(pi* || prior) for the schedule; measured against the canonical
    /// greedy optimum when absent.
    std::optional<double> epsilon_llm;
    double bonus_scale = 1.0;
    std::uint64_t seed = 0;
    /// Stop as soon as the mixture's suboptimality gap falls to this level.
    std::optional<double> stop_gap;
    bool keep_trajectories = true;
};

struct EpisodeRecord {
    int t = 0;
    Trajectory trajectory;
    double episode_return = 0.0;
    double subopt_gap = 0.0;
    double reg_subopt_gap = 0.0;
    double max_gap = 0.0;
    double v_hi_root = 0.0;
    double v_lo_root = 0.0;
};

struct RunLog {
    LinvitConfig config;
    double lambda = 0.0;
    double epsilon_llm = 0.0;
    double optimal_value = 0.0;
    double regularized_optimal_value = 0.0;
    std::vector<EpisodeRecord> episodes;

    /// First episode index t whose mixture gap is at most `epsilon`.
    std::optional<int> episodes_to_gap(double epsilon) const {
        for (const auto& rec : episodes) {
            if (rec.subopt_gap <= epsilon) {
                return rec.t;
            }
        }
        return std::nullopt;
    }

    static constexpr const char* kCsvHeader = "t,return,subopt_gap,reg_subopt_gap,max_gap,V_hi_root,V_lo_root";

    void write_csv_row(std::ostream& out, const EpisodeRecord& rec) const {
        out << rec.t << ',' << format_real(rec.episode_return) << ',' << format_real(rec.subopt_gap) << ','
            << format_real(rec.reg_subopt_gap) << ',' << format_real(rec.max_gap) << ','
            << format_real(rec.v_hi_root) << ',' << format_real(rec.v_lo_root) << '\n';
    }

    void write_csv(std::ostream& out) const {
        out << kCsvHeader << '\n';
        for (const auto& rec : episodes) {
            write_csv_row(out, rec);
        }
    }
};

struct LinvitResult {
    MixturePolicy mixture;
    RunLog log;
};

/// Called after planning in every episode, before acting.
using PlanObserver = std::function<void(int t, const ValueBounds&, const EmpiricalModel&)>;

inline LinvitResult run_linvit(const TabularMDP& mdp, const PolicyPrior& prior, const LinvitConfig& config,
                               const PlanObserver& observer = {}) {
    detail::require(config.episodes >= 1, "run_linvit: episode budget must be at least 1");
    detail::require(prior.matches(mdp), "run_linvit: prior dimensions do not match the MDP");

    const auto optimum = exact_optimal_value(mdp);
    const int s1 = mdp.initial_state();

    LinvitResult result;
    RunLog& log = result.log;
    log.config = config;
    log.epsilon_llm = config.epsilon_llm ? *config.epsilon_llm : policy_kl(mdp, optimum.greedy, prior);
    const double lambda = config.regularization.resolve(config.epsilon, log.epsilon_llm);
    log.lambda = lambda;
    log.optimal_value = optimum.V(0, s1);
    const auto reg_opt = regularized_optimal_value(mdp, prior, lambda);
    log.regularized_optimal_value = reg_opt.tables.V(0, s1);

    EmpiricalModel model = EmpiricalModel::for_mdp(mdp, config.episodes, config.delta, config.bonus_scale);
    Rng rng(config.seed);
    double value_sum = 0.0;
    double reg_value_sum = 0.0;
    const bool finite_lambda = std::isfinite(lambda);

    for (int t = 1; t <= config.episodes; ++t) {
        const ValueBounds bounds = plan_bounds(model, mdp, prior, lambda);
        if (observer) {
            observer(t, bounds, model);
        }
        result.mixture.components.push_back(optimistic_greedy_policy(bounds, prior, lambda));
        const auto& component = result.mixture.components.back();
        const auto behaviour = exploration_policy(bounds, prior, lambda);
        Trajectory traj = sample_episode(mdp, behaviour, rng);
        model.record(traj);

        value_sum += exact_policy_value(mdp, component)(0, s1);
        if (finite_lambda) {
            reg_value_sum += regularized_policy_value(mdp, prior, component, lambda)(0, s1);
        }
        EpisodeRecord rec;
        rec.t = t;
        rec.episode_return = traj.total_reward();
        rec.subopt_gap = log.optimal_value - value_sum / t;
        rec.reg_subopt_gap = finite_lambda ? log.regularized_optimal_value - reg_value_sum / t : 0.0;
        rec.max_gap = bounds.max_gap();
        rec.v_hi_root = bounds.V_hi(0, s1);
        rec.v_lo_root = bounds.V_lo(0, s1);
        if (config.keep_trajectories) {
            rec.trajectory = std::move(traj);
        }
        log.episodes.push_back(std::move(rec));
        if (config.stop_gap && log.episodes.back().subopt_gap <= *config.stop_gap) {
            break;
        }
    }
    return result;
}

}  // namespace linvit
