#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "linvit/linvit.hpp"
#include "linvit/priors.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace linvit;
using testing_helpers::random_policy;
using testing_helpers::random_prior;

namespace {

TabularMDP fixed_mdp() { return random_mdp({5, 3, 3, 2, 0.0, false}, 7); }

void expect_valid_bounds(const ValueBounds& b) {
    const int H = b.horizon();
    for (int h = 0; h <= H; ++h) {
        for (int s = 0; s < b.num_states(); ++s) {
            if (h == H) {
                EXPECT_EQ(b.V_hi(h, s), 0.0);
                EXPECT_EQ(b.V_lo(h, s), 0.0);
            }
            EXPECT_LE(b.V_lo(h, s), b.V_hi(h, s));
            EXPECT_GE(b.V_lo(h, s), 0.0);
            EXPECT_LE(b.V_hi(h, s), H);
            for (int a = 0; a < b.num_actions(); ++a) {
                EXPECT_LE(b.Q_lo(h, s, a), b.Q_hi(h, s, a));
                EXPECT_GE(b.Q_lo(h, s, a), 0.0);
                EXPECT_LE(b.Q_hi(h, s, a), H);
            }
        }
    }
}

}  // namespace

TEST(EmpiricalModel, FreshModel) {
    const EmpiricalModel model(3, 4, 2, 100, 0.05);
    for (int h = 0; h < 3; ++h) {
        for (int s = 0; s < 4; ++s) {
            for (int a = 0; a < 2; ++a) {
                EXPECT_EQ(model.count(h, s, a), 0);
                EXPECT_EQ(model.bonus(h, s, a), 6.0);
                for (double p : model.transition(h, s, a)) {
                    EXPECT_EQ(p, 0.25);
                }
            }
        }
    }
    EXPECT_THROW(EmpiricalModel(3, 4, 2, 0, 0.05), ConfigurationError);
    EXPECT_THROW(EmpiricalModel(3, 4, 2, 10, 1.0), ConfigurationError);
    EXPECT_THROW(EmpiricalModel(3, 4, 2, 10, 0.1, 0.0), ConfigurationError);
}

TEST(EmpiricalModel, SingleVisitAndCountInvariants) {
    EmpiricalModel model(2, 3, 2, 10, 0.1);
    Trajectory t{{{0, 0, 1, 0.5, 2}, {1, 2, 0, 0.0, 1}}};
    const auto updated = update_model(model, t);
    EXPECT_EQ(model.count(0, 0, 1), 0);
    EXPECT_EQ(updated.count(0, 0, 1), 1);
    EXPECT_EQ(updated.transition(0, 0, 1)[2], 1.0);
    EXPECT_EQ(updated.transition(0, 0, 1)[0], 0.0);
    EXPECT_EQ(updated.transition(0, 1, 1)[0], 1.0 / 3.0);  // untouched
    EXPECT_EQ(updated.bonus(0, 1, 1), 4.0);

    const auto mdp = random_mdp({3, 2, 2, 0, 0.0, false}, 1);
    Rng rng(3);
    for (int e = 0; e < 300; ++e) {
        model.record(sample_episode(mdp, StochasticPolicy::uniform(2, 3, 2), rng));
    }
    EXPECT_EQ(model.episodes(), 300);
    for (int h = 0; h < 2; ++h) {
        for (int s = 0; s < 3; ++s) {
            for (int a = 0; a < 2; ++a) {
                std::int64_t total = 0;
                for (int sp = 0; sp < 3; ++sp) {
                    total += model.count(h, s, a, sp);
                }
                EXPECT_EQ(total, model.count(h, s, a));
                for (int sp = 0; sp < 3 && total > 0; ++sp) {
                    EXPECT_EQ(model.transition(h, s, a)[sp],
                              static_cast<double>(model.count(h, s, a, sp)) / static_cast<double>(total));
                }
            }
        }
    }
    EXPECT_THROW(model.record(Trajectory{{{0, 5, 0, 0.0, 0}}}), ConfigurationError);
}

TEST(EmpiricalModel, BonusMatchesHighPrecisionFormula) {
    const EmpiricalModel model(2, 3, 2, 10, 0.1, 1.0);
    EXPECT_NEAR(model.bonus_for_count(100), oracle::bonus(2, 10, 3, 2, 0.1, 1.0, 100), 1e-14);
    for (long long n : {1LL, 5LL, 17LL, 100LL, 1000LL, 123456LL}) {
        for (double cb : {0.01, 0.5, 1.0}) {
            const EmpiricalModel m(4, 5, 3, 2000, 0.05, cb);
            EXPECT_NEAR(m.bonus_for_count(n), oracle::bonus(4, 2000, 5, 3, 0.05, cb, n), 1e-13)
                << "n " << n << " cb " << cb;
        }
    }
    EXPECT_EQ(model.bonus_for_count(0), 4.0);
}

TEST(PlanBounds, ZeroBonusAndExactModelCollapse) {
    const auto mdp = random_mdp({4, 3, 3, 0, 0.0, true}, 31);
    const auto prior = random_prior(3, 4, 3, 32);
    // A vanishing bonus scale leaves u far below double resolution once n > 0.
    EmpiricalModel model(3, 4, 3, 10, 0.05, 1e-300);
    Trajectory all;
    for (int h = 0; h < 3; ++h) {
        for (int s = 0; s < 4; ++s) {
            for (int a = 0; a < 3; ++a) {
                all.steps.push_back({h, s, a, mdp.reward(h, s, a), argmax(mdp.transition(h, s, a))});
            }
        }
    }
    model.record(all);
    for (double lambda : {0.0, 0.3, 2.0}) {
        const auto b = plan_bounds(model, mdp, prior, lambda);
        const auto reg = regularized_optimal_value(mdp, prior, lambda);
        for (int h = 0; h < 3; ++h) {
            for (int s = 0; s < 4; ++s) {
                EXPECT_NEAR(b.V_hi(h, s), b.V_lo(h, s), 1e-12);
                EXPECT_NEAR(b.V_hi(h, s), reg.tables.V(h, s), 1e-12);
                for (int a = 0; a < 3; ++a) {
                    EXPECT_NEAR(b.Q_hi(h, s, a), b.Q_lo(h, s, a), 1e-12);
                    EXPECT_NEAR(b.Q_hi(h, s, a), clip_value(reg.tables.Q(h, s, a), 0.0, 3.0), 1e-12);
                }
            }
        }
        expect_valid_bounds(b);
    }
}

TEST(PlanBounds, FreshModelSaturatesClip) {
    const auto mdp = fixed_mdp();
    const auto prior = random_prior(3, 5, 3, 2);
    const auto model = EmpiricalModel::for_mdp(mdp, 100, 0.05);
    const auto b = plan_bounds(model, mdp, prior, 0.4);
    for (int h = 0; h < 3; ++h) {
        for (int s = 0; s < 5; ++s) {
            for (int a = 0; a < 3; ++a) {
                EXPECT_EQ(b.Q_hi(h, s, a), 3.0);
                EXPECT_EQ(b.Q_lo(h, s, a), 0.0);
            }
        }
    }
    EXPECT_EQ(b.max_gap(), 3.0);
}

TEST(PlanBounds, SandwichAfter200Episodes) {
    // 4 states, 2 actions; the high-probability event should hold in at least
    // 95 of 100 seeded runs.
    const auto mdp = random_mdp({4, 2, 3, 0, 0.0, false}, 404);
    const auto prior = build_prior(mdp, {PriorKind::contaminated, 0.5}).prior;
    const double lambda = 0.2;
    const auto oracle_Q = regularized_optimal_value(mdp, prior, lambda).tables.Q;
    int held = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        LinvitConfig cfg;
        cfg.episodes = 200;
        cfg.regularization = {lambda, false};
        cfg.seed = seed;
        cfg.keep_trajectories = false;
        bool ok = true;
        run_linvit(mdp, prior, cfg, [&](int, const ValueBounds& b, const EmpiricalModel&) {
            for (int h = 0; h < 3; ++h) {
                for (int s = 0; s < 4; ++s) {
                    for (int a = 0; a < 2; ++a) {
                        ok = ok && b.Q_lo(h, s, a) <= oracle_Q(h, s, a) + 1e-12 &&
                             oracle_Q(h, s, a) <= b.Q_hi(h, s, a) + 1e-12;
                    }
                }
            }
        });
        held += ok ? 1 : 0;
    }
    EXPECT_GE(held, 95);
}

TEST(PlanBounds, InvariantsHoldThroughoutARun) {
    const auto mdp = fixed_mdp();
    const auto prior = random_prior(3, 5, 3, 8);
    LinvitConfig cfg;
    cfg.episodes = 300;
    cfg.regularization = {0.1, false};
    int calls = 0;
    run_linvit(mdp, prior, cfg, [&](int t, const ValueBounds& b, const EmpiricalModel& m) {
        ++calls;
        EXPECT_EQ(m.episodes(), t - 1);
        expect_valid_bounds(b);
    });
    EXPECT_EQ(calls, 300);
}

TEST(PlanBounds, UncertaintyShrinksWithCounts) {
    const auto mdp = fixed_mdp();
    const auto prior = PolicyPrior::uniform(3, 5, 3);
    LinvitConfig cfg;
    cfg.episodes = 3000;
    cfg.regularization = {0.05, false};
    std::optional<ValueBounds> bounds;
    std::optional<EmpiricalModel> model;
    run_linvit(mdp, prior, cfg, [&](int, const ValueBounds& b, const EmpiricalModel& m) {
        bounds = b;
        model = m;
    });
    const auto& last = *bounds;
    const auto& final_model = *model;
    const double log_term = final_model.log_term();
    double previous = std::numeric_limits<double>::infinity();
    for (int m : {1, 4, 16, 64, 256, 1024}) {
        double widest = 0.0;
        double widest_last_step = 0.0;
        for (int h = 0; h < 3; ++h) {
            for (int s = 0; s < 5; ++s) {
                for (int a = 0; a < 3; ++a) {
                    if (final_model.count(h, s, a) >= m) {
                        const double gap = last.Q_hi(h, s, a) - last.Q_lo(h, s, a);
                        widest = std::max(widest, gap);
                        if (h == 2) {
                            widest_last_step = std::max(widest_last_step, gap);
                        }
                    }
                }
            }
        }
        EXPECT_LE(widest, previous);
        previous = widest;
        // At the last step the continuation is zero, so the gap is at most 2u(m).
        EXPECT_LE(widest_last_step, 2.0 * 3 * 1.0 * 3 * std::sqrt(log_term / m) + 1e-6);
    }
}

TEST(ExplorationPolicy, SingleStepIsPureUncertaintyArgmax) {
    ValueBounds b{ActionTable(2, 1, 3), StateTable(2, 1), ActionTable(2, 1, 3), StateTable(2, 1)};
    b.Q_hi(0, 0, 0) = 0.9;
    b.Q_hi(0, 0, 1) = 0.8;
    b.Q_hi(0, 0, 2) = 1.0;
    b.Q_lo(0, 0, 0) = 0.5;
    b.Q_lo(0, 0, 1) = 0.1;
    b.Q_lo(0, 0, 2) = 0.9;
    const auto prior = PolicyPrior::uniform(1, 1, 3);
    const auto pi = exploration_policy(b, prior, 0.5);
    EXPECT_EQ(pi(0, 0, 1), 1.0);
    EXPECT_EQ(pi(0, 0, 0), 0.0);
}

TEST(ExplorationPolicy, ZeroUncertaintyTiesToFirstAction) {
    const int H = 4;
    ValueBounds b{ActionTable(H + 1, 2, 3), StateTable(H + 1, 2), ActionTable(H + 1, 2, 3), StateTable(H + 1, 2)};
    Rng rng(1);
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < 2; ++s) {
            for (int a = 0; a < 3; ++a) {
                b.Q_hi(h, s, a) = b.Q_lo(h, s, a) = (H - h) * rng.uniform();
            }
        }
    }
    const auto prior = random_prior(H, 2, 3, 4);
    const auto pi = exploration_policy(b, prior, 0.7);
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < 2; ++s) {
            const auto soft = softmax_policy(b.Q_hi.row(h, s), prior.row(h, s), 0.7);
            for (int a = 0; a < 3; ++a) {
                EXPECT_NEAR(pi(h, s, a), (a == 0 ? 1.0 / H : 0.0) + (1.0 - 1.0 / H) * soft[a], 1e-15);
            }
        }
    }
}

TEST(ExplorationPolicy, RowsAreDistributionsDominatingTheGreedyPart) {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const int H = 1 + static_cast<int>(rng.below(5));
        const int S = 1 + static_cast<int>(rng.below(4));
        const int A = 1 + static_cast<int>(rng.below(5));
        ValueBounds b{ActionTable(H + 1, S, A), StateTable(H + 1, S), ActionTable(H + 1, S, A),
                      StateTable(H + 1, S)};
        for (int h = 0; h < H; ++h) {
            for (int s = 0; s < S; ++s) {
                for (int a = 0; a < A; ++a) {
                    const double x = H * rng.uniform();
                    const double y = H * rng.uniform();
                    b.Q_hi(h, s, a) = std::max(x, y);
                    b.Q_lo(h, s, a) = std::min(x, y);
                }
            }
        }
        const auto prior = random_prior(H, S, A, 100 + trial);
        const double lambda = 0.05 + rng.uniform();
        const auto pi = exploration_policy(b, prior, lambda);
        for (int h = 0; h < H; ++h) {
            for (int s = 0; s < S; ++s) {
                EXPECT_TRUE(is_probability_row(pi.row(h, s)));
                // Independent recomputation of the greedy term.
                double z = 0.0;
                double m = -1e300;
                for (int a = 0; a < A; ++a) {
                    m = std::max(m, b.Q_hi(h, s, a));
                }
                for (int a = 0; a < A; ++a) {
                    z += prior(h, s, a) * std::exp((b.Q_hi(h, s, a) - m) / lambda);
                }
                for (int a = 0; a < A; ++a) {
                    const double greedy = prior(h, s, a) * std::exp((b.Q_hi(h, s, a) - m) / lambda) / z;
                    EXPECT_GE(pi(h, s, a), (1.0 - 1.0 / H) * greedy - 1e-12);
                }
            }
        }
    }
}

TEST(EvaluateMixture, MeanOfComponentValues) {
    const auto mdp = fixed_mdp();
    const auto opt = exact_optimal_value(mdp);
    const auto uni = StochasticPolicy::uniform(3, 5, 3);
    const double v_opt = exact_policy_value(mdp, opt.greedy)(0, 0);
    const double v_uni = exact_policy_value(mdp, uni)(0, 0);
    EXPECT_DOUBLE_EQ(evaluate_mixture(mdp, {{opt.greedy}}), v_opt);
    EXPECT_DOUBLE_EQ(evaluate_mixture(mdp, {{opt.greedy, opt.greedy}}), v_opt);
    EXPECT_NEAR(evaluate_mixture(mdp, {{opt.greedy, uni}}), 0.5 * (v_opt + v_uni), 1e-15);
    EXPECT_THROW(evaluate_mixture(mdp, MixturePolicy{}), ConfigurationError);
}

TEST(RunLinvit, SingleEpisodeComponentIsPrior) {
    const auto mdp = fixed_mdp();
    const auto prior = random_prior(3, 5, 3, 44);
    LinvitConfig cfg;
    cfg.episodes = 1;
    cfg.regularization = {0.3, false};
    const auto res = run_linvit(mdp, prior, cfg);
    ASSERT_EQ(res.mixture.components.size(), 1u);
    // Initial optimistic bounds are constant (= H), so the softmax returns the prior.
    for (std::size_t i = 0; i < prior.policy().table().data().size(); ++i) {
        EXPECT_NEAR(res.mixture.components[0].table().data()[i], prior.policy().table().data()[i], 1e-15);
    }
    EXPECT_EQ(res.log.episodes.size(), 1u);
    cfg.episodes = 0;
    EXPECT_THROW(run_linvit(mdp, prior, cfg), ConfigurationError);
}

TEST(RunLinvit, DeterministicReplay) {
    const auto mdp = fixed_mdp();
    const auto prior = build_prior(mdp, {PriorKind::contaminated, 0.5}).prior;
    LinvitConfig cfg;
    cfg.episodes = 500;
    cfg.regularization.use_schedule = true;
    cfg.seed = 12;
    std::ostringstream a, b;
    run_linvit(mdp, prior, cfg).log.write_csv(a);
    run_linvit(mdp, prior, cfg).log.write_csv(b);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str().substr(0, a.str().find('\n')), RunLog::kCsvHeader);
    cfg.seed = 13;
    std::ostringstream c;
    run_linvit(mdp, prior, cfg).log.write_csv(c);
    EXPECT_NE(a.str(), c.str());
}

TEST(RunLinvit, GapTraceIsConsistent) {
    const auto mdp = fixed_mdp();
    const auto prior = random_prior(3, 5, 3, 5);
    LinvitConfig cfg;
    cfg.episodes = 400;
    cfg.regularization = {0.2, false};
    const auto res = run_linvit(mdp, prior, cfg);
    const double vstar = exact_optimal_value(mdp).V(0, 0);
    EXPECT_NEAR(res.log.optimal_value, vstar, 1e-15);
    for (const auto& rec : res.log.episodes) {
        EXPECT_GE(rec.subopt_gap, -1e-8);
        EXPECT_EQ(static_cast<int>(rec.trajectory.steps.size()), 3);
        EXPECT_LE(rec.v_lo_root, rec.v_hi_root);
    }
    EXPECT_NEAR(res.log.episodes.back().subopt_gap, vstar - evaluate_mixture(mdp, res.mixture), 1e-12);
    MixturePolicy first_ten{{res.mixture.components.begin(), res.mixture.components.begin() + 10}};
    EXPECT_NEAR(res.log.episodes[9].subopt_gap, vstar - evaluate_mixture(mdp, first_ten), 1e-12);
}

TEST(RunLinvit, NearOptimalPriorIsImmediatelyGood) {
    const auto mdp = fixed_mdp();
    const auto built = build_prior(mdp, {PriorKind::contaminated, 1.0});
    LinvitConfig cfg;
    cfg.episodes = 50;
    cfg.regularization.use_schedule = true;
    cfg.epsilon = 0.2;
    const auto res = run_linvit(mdp, built.prior, cfg);
    EXPECT_GT(res.log.lambda, 1e6);
    EXPECT_LE(res.log.episodes.back().subopt_gap, 0.2);
    EXPECT_EQ(res.log.episodes_to_gap(0.2), std::optional<int>(1));
}

TEST(RunLinvit, UniformPriorStillConverges) {
    const auto mdp = fixed_mdp();
    const auto prior = PolicyPrior::uniform(3, 5, 3);
    LinvitConfig cfg;
    cfg.episodes = 300000;
    cfg.stop_gap = 0.1 * 3;
    cfg.regularization.use_schedule = true;
    cfg.keep_trajectories = false;
    cfg.seed = 3;
    const auto res = run_linvit(mdp, prior, cfg);
    const auto& eps = res.log.episodes;
    // Mean gap over consecutive 50-episode windows, sampled every 5000 episodes.
    auto window = [&](std::size_t end) {
        double total = 0.0;
        for (std::size_t i = end - 50; i < end; ++i) {
            total += eps[i].subopt_gap;
        }
        return total / 50.0;
    };
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t end = 5000; end <= eps.size(); end += 5000) {
        const double w = window(end);
        EXPECT_LE(w, previous + 1e-9) << "window ending at " << end;
        previous = w;
    }
    EXPECT_LE(eps.back().subopt_gap, 0.1 * 3);
    EXPECT_LT(eps.size(), 300000u);
}

TEST(RunLinvit, StopGapEndsEarly) {
    const auto mdp = fixed_mdp();
    const auto built = build_prior(mdp, {PriorKind::contaminated, 0.9});
    LinvitConfig cfg;
    cfg.episodes = 1000;
    cfg.regularization.use_schedule = true;
    cfg.stop_gap = 0.2;
    const auto res = run_linvit(mdp, built.prior, cfg);
    ASSERT_TRUE(res.log.episodes_to_gap(0.2).has_value());
    EXPECT_EQ(static_cast<int>(res.log.episodes.size()), *res.log.episodes_to_gap(0.2));
}

TEST(RunLinvit, ZeroLambdaMatchesBonusGreedyValueIteration) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto mdp = random_mdp({4, 3, 3, 0, 0.0, false}, 1000 + seed);
        const auto prior = PolicyPrior::uniform(3, 4, 3);
        LinvitConfig cfg;
        cfg.episodes = 60;
        cfg.regularization = {0.0, false};
        cfg.seed = seed;
        std::vector<std::vector<int>> expected;
        run_linvit(mdp, prior, cfg, [&](int, const ValueBounds&, const EmpiricalModel& m) {
            // Optimistic VI from the raw counts.
            const double log_term = std::log(4.0 * 3 * cfg.episodes * 4 * 4 * 3 / cfg.delta);
            std::vector<double> V(4, 0.0);
            std::vector<int> acts(12);
            for (int h = 2; h >= 0; --h) {
                std::vector<double> nextV(4);
                for (int s = 0; s < 4; ++s) {
                    double best = -1.0;
                    for (int a = 0; a < 3; ++a) {
                        const auto n = m.count(h, s, a);
                        double cont = 0.0;
                        for (int sp = 0; sp < 4; ++sp) {
                            const double p = n == 0 ? 0.25 : static_cast<double>(m.count(h, s, a, sp)) / n;
                            cont += p * V[sp];
                        }
                        const double u = n == 0 ? 6.0 : std::min(6.0, 3.0 * 3.0 * std::sqrt(log_term / n));
                        const double q = std::clamp(mdp.reward(h, s, a) + cont + u, 0.0, 3.0);
                        if (q > best) {
                            best = q;
                            acts[h * 4 + s] = a;
                        }
                    }
                    nextV[s] = best;
                }
                V = nextV;
            }
            expected.push_back(acts);
        });
        const auto res = run_linvit(mdp, prior, cfg);
        for (int t = 0; t < cfg.episodes; ++t) {
            for (int h = 0; h < 3; ++h) {
                for (int s = 0; s < 4; ++s) {
                    EXPECT_EQ(argmax(res.mixture.components[t].row(h, s)), expected[t][h * 4 + s])
                        << "seed " << seed << " t " << t << " h " << h << " s " << s;
                }
            }
        }
    }
}
