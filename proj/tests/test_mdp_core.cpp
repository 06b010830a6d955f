#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "linvit/dynamic_programming.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace linvit;
using testing_helpers::chain_mdp;
using testing_helpers::make_mdp;
using testing_helpers::random_policy;

namespace {

TabularMDP random_small(int S, int A, int H, std::uint64_t seed, int branching = 0) {
    return random_mdp({S, A, H, branching, 0.0, false}, seed);
}

std::vector<double> one_hot(int S, int i) {
    std::vector<double> row(S, 0.0);
    row[i] = 1.0;
    return row;
}

}  // namespace

TEST(TabularMdp, RejectsMalformedTables) {
    EXPECT_THROW(TabularMDP(0, 1, 1, {}, {}), ConfigurationError);
    EXPECT_THROW(TabularMDP(1, 1, 1, {1.5}, {1.0}), ConfigurationError);
    EXPECT_THROW(TabularMDP(2, 1, 1, {0.0, 0.0}, {0.5, 0.4, 1.0, 0.0}), ConfigurationError);
    EXPECT_THROW(TabularMDP(2, 1, 1, {0.0, 0.0}, {1.2, -0.2, 1.0, 0.0}), ConfigurationError);
    EXPECT_THROW(TabularMDP(1, 1, 1, {0.0}, {1.0}, 3), ConfigurationError);
    EXPECT_THROW(TabularMDP(1, 1, 1, {0.0, 0.0}, {1.0}), ConfigurationError);
    EXPECT_NO_THROW(TabularMDP(2, 1, 1, {0.0, 1.0}, {0.5, 0.5 + 5e-10, 1.0, 0.0}));
}

TEST(TabularMdp, TextRoundTrip) {
    const auto mdp = random_small(4, 3, 3, 21);
    std::stringstream text;
    write_mdp(text, mdp);
    const auto back = read_mdp(text);
    EXPECT_EQ(back.rewards(), mdp.rewards());
    EXPECT_EQ(back.transitions(), mdp.transitions());
    EXPECT_EQ(back.initial_state(), mdp.initial_state());
}

TEST(TabularMdp, ReadsCommentsAndOptionalInitialState) {
    std::istringstream in(
        "# two states, one action, one step\n"
        "2 1 1 1\n"
        "0.25\n0.5   # rewards\n"
        "1 0\n0 1\n");
    const auto mdp = read_mdp(in);
    EXPECT_EQ(mdp.initial_state(), 1);
    EXPECT_DOUBLE_EQ(mdp.reward(0, 1, 0), 0.5);
    std::istringstream truncated("2 1 1\n0.25 0.5\n1 0\n");
    EXPECT_THROW(read_mdp(truncated), ConfigurationError);
    std::istringstream garbage("2 1 x\n");
    EXPECT_THROW(read_mdp(garbage), ConfigurationError);
}

TEST(ClipValue, Examples) {
    const double H = 4.0;
    EXPECT_EQ(clip_value(-1.0, 0.0, H), 0.0);
    EXPECT_EQ(clip_value(H + 3.0, 0.0, H), H);
    EXPECT_EQ(clip_value(0.5, 0.0, H), 0.5);
    EXPECT_THROW(clip_value(0.5, 1.0, 0.0), ConfigurationError);
}

TEST(PolicyPrior, FlooringKeepsRowsNormalized) {
    const std::vector<double> probs{1.0, 0.0, 0.0, 0.2, 0.3, 0.5};
    const PolicyPrior prior(1, 2, 3, probs, 1e-3);
    for (int s = 0; s < 2; ++s) {
        EXPECT_TRUE(is_probability_row(prior.row(0, s)));
        for (double p : prior.row(0, s)) {
            EXPECT_GE(p, 1e-3);
        }
    }
    // Rows already above the floor are left alone.
    EXPECT_EQ(prior(0, 1, 0), 0.2);
    EXPECT_NEAR(prior(0, 0, 0), 1e-3 + (1 - 3e-3), 1e-15);
    EXPECT_THROW(PolicyPrior(1, 1, 2, {0.5, 0.5}, 0.6), ConfigurationError);
    EXPECT_THROW(PolicyPrior(1, 1, 2, {0.5, 0.6}), ConfigurationError);
}

TEST(SampleEpisode, DeterministicMdpGivesUniqueTrajectory) {
    const auto mdp = random_mdp({5, 2, 4, 0, 0.0, true}, 3);
    ASSERT_TRUE(mdp.is_deterministic());
    const std::vector<int> actions{1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0, 1, 0, 0, 1, 1, 1, 0, 0, 1};
    const auto policy = StochasticPolicy::deterministic(4, 5, 2, actions);
    const auto first = sample_episode(mdp, policy, 1);
    for (std::uint64_t seed = 2; seed < 20; ++seed) {
        EXPECT_EQ(sample_episode(mdp, policy, seed), first);
    }
}

TEST(SampleEpisode, SingleStepAndChaining) {
    const auto one = random_small(3, 2, 1, 4);
    const auto traj = sample_episode(one, StochasticPolicy::uniform(1, 3, 2), 9);
    ASSERT_EQ(traj.steps.size(), 1u);
    EXPECT_EQ(traj.steps[0].h, 0);
    EXPECT_EQ(traj.steps[0].state, one.initial_state());

    const auto mdp = random_small(4, 3, 5, 8);
    const auto policy = random_policy(5, 4, 3, 2);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto t = sample_episode(mdp, policy, seed);
        ASSERT_EQ(t.steps.size(), 5u);
        for (int h = 0; h < 5; ++h) {
            EXPECT_EQ(t.steps[h].h, h);
            EXPECT_GT(mdp.transition(h, t.steps[h].state, t.steps[h].action)[t.steps[h].next_state], 0.0);
            EXPECT_EQ(t.steps[h].reward, mdp.reward(h, t.steps[h].state, t.steps[h].action));
            if (h + 1 < 5) {
                EXPECT_EQ(t.steps[h].next_state, t.steps[h + 1].state);
            }
        }
    }
}

TEST(SampleEpisode, EmpiricalTransitionFrequency) {
    const auto mdp = make_mdp(
        2, 2, 1, [](int, int, int) { return 0.0; },
        [](int, int s, int a) {
            if (s == 0 && a == 0) {
                return std::vector<double>{0.7, 0.3};
            }
            return one_hot(2, 0);
        });
    const auto policy = StochasticPolicy::deterministic(1, 2, 2, std::vector<int>{0, 0});
    Rng rng(2024);
    int hits = 0;
    for (int e = 0; e < 10000; ++e) {
        hits += sample_episode(mdp, policy, rng).steps[0].next_state == 1 ? 1 : 0;
    }
    EXPECT_NEAR(hits / 10000.0, 0.3, 0.02);
}

TEST(SampleEpisode, ReplayAndDimensionChecks) {
    const auto mdp = random_small(4, 3, 4, 5);
    const auto policy = random_policy(4, 4, 3, 6);
    EXPECT_EQ(sample_episode(mdp, policy, 77), sample_episode(mdp, policy, 77));
    EXPECT_THROW(sample_episode(mdp, StochasticPolicy::uniform(3, 4, 3), 1), ConfigurationError);
    EXPECT_THROW(exact_policy_value(mdp, StochasticPolicy::uniform(4, 4, 2)), ConfigurationError);
}

TEST(ExactPolicyValue, ZeroAndFullReward) {
    const auto zero = make_mdp(
        3, 2, 4, [](int, int, int) { return 0.0; }, [](int, int s, int) { return one_hot(3, (s + 1) % 3); });
    const auto V0 = exact_policy_value(zero, StochasticPolicy::uniform(4, 3, 2));
    for (double v : V0.data()) {
        EXPECT_EQ(v, 0.0);
    }
    const auto full = make_mdp(
        3, 2, 1, [](int, int, int) { return 1.0; }, [](int, int, int) { return one_hot(3, 0); });
    const auto V1 = exact_policy_value(full, random_policy(1, 3, 2, 1));
    for (int s = 0; s < 3; ++s) {
        EXPECT_DOUBLE_EQ(V1(0, s), 1.0);
        EXPECT_EQ(V1(1, s), 0.0);
    }
}

TEST(ExactPolicyValue, ChainMatchesTrajectoryEnumeration) {
    for (int H = 1; H <= 5; ++H) {
        const auto mdp = chain_mdp(H);
        const auto right = StochasticPolicy::deterministic(H, 3, 2, std::vector<int>(3 * H, 1));
        const auto V = exact_policy_value(mdp, right);
        for (int s = 0; s < 3; ++s) {
            const double expect = oracle::enumerate_value(mdp, [&](int h, int st, int a) { return right(h, st, a); }, 0, s);
            EXPECT_NEAR(V(0, s), expect, 1e-12) << "H=" << H << " s=" << s;
        }
    }
}

TEST(ExactPolicyValue, StochasticPoliciesMatchEnumerationAndStayBounded) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto mdp = random_small(3, 2, 4, 100 + seed);
        const auto policy = random_policy(4, 3, 2, seed);
        const auto V = exact_policy_value(mdp, policy);
        const double expect =
            oracle::enumerate_value(mdp, [&](int h, int s, int a) { return policy(h, s, a); }, 0, 0);
        EXPECT_NEAR(V(0, 0), expect, 1e-12);
        for (int h = 0; h <= 4; ++h) {
            for (int s = 0; s < 3; ++s) {
                EXPECT_GE(V(h, s), 0.0);
                EXPECT_LE(V(h, s), 4 - h + 1e-12);
            }
        }
    }
}

TEST(ExactOptimalValue, SingleActionAndConstantReward) {
    const auto mdp = random_small(4, 1, 3, 9);
    const auto opt = exact_optimal_value(mdp);
    const auto only = exact_policy_value(mdp, StochasticPolicy::uniform(3, 4, 1));
    EXPECT_EQ(opt.V.data(), only.data());

    const double c = 0.35;
    const auto flat = make_mdp(
        3, 3, 4, [c](int, int, int) { return c; }, [](int, int s, int a) { return one_hot(3, (s + a) % 3); });
    const auto fopt = exact_optimal_value(flat);
    for (int h = 0; h <= 4; ++h) {
        for (int s = 0; s < 3; ++s) {
            EXPECT_NEAR(fopt.V(h, s), c * (4 - h), 1e-12);
        }
    }
    // All actions tie: the greedy policy picks action 0 everywhere.
    for (int h = 0; h < 4; ++h) {
        for (int s = 0; s < 3; ++s) {
            EXPECT_EQ(fopt.greedy(h, s, 0), 1.0);
        }
    }
}

TEST(ExactOptimalValue, MatchesBruteForcePolicyEnumeration) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto mdp = random_small(4, 3, 3, 300 + seed);
        const auto opt = exact_optimal_value(mdp);
        EXPECT_NEAR(opt.V(0, mdp.initial_state()), oracle::brute_force_optimum(mdp), 1e-12);
    }
}

TEST(ExactOptimalValue, DominatesRandomPoliciesAndIsOneHot) {
    const auto mdp = random_small(5, 3, 4, 41);
    const auto opt = exact_optimal_value(mdp);
    for (int h = 0; h < 4; ++h) {
        for (int s = 0; s < 5; ++s) {
            int ones = 0;
            for (int a = 0; a < 3; ++a) {
                ones += opt.greedy(h, s, a) == 1.0 ? 1 : 0;
            }
            EXPECT_EQ(ones, 1);
        }
    }
    EXPECT_EQ(exact_policy_value(mdp, opt.greedy).data(), opt.V.data());
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto V = exact_policy_value(mdp, random_policy(4, 5, 3, seed));
        for (std::size_t i = 0; i < V.data().size(); ++i) {
            EXPECT_LE(V.data()[i], opt.V.data()[i] + 1e-12);
        }
    }
}

TEST(Occupancy, DeterministicIsOneHotAlongPath) {
    const auto mdp = random_mdp({6, 2, 5, 0, 0.0, true}, 12);
    const auto policy = StochasticPolicy::deterministic(5, 6, 2, std::vector<int>(30, 1));
    const auto occ = occupancy(mdp, policy);
    const auto traj = sample_episode(mdp, policy, 0);
    for (int h = 0; h < 5; ++h) {
        for (int s = 0; s < 6; ++s) {
            EXPECT_EQ(occ.d(h, s), s == traj.steps[h].state ? 1.0 : 0.0);
        }
    }
}

TEST(Occupancy, OneStepPushforward) {
    // Doubly stochastic, symmetric two-state dynamics.
    const auto mdp = make_mdp(
        2, 2, 3, [](int, int, int) { return 0.0; },
        [](int, int s, int a) {
            const double stay = a == 0 ? 0.8 : 0.4;
            std::vector<double> row(2);
            row[s] = stay;
            row[1 - s] = 1.0 - stay;
            return row;
        });
    const auto occ = occupancy(mdp, StochasticPolicy::uniform(3, 2, 2));
    EXPECT_DOUBLE_EQ(occ.d(0, 0), 1.0);
    EXPECT_NEAR(occ.d(1, 0), 0.5 * 0.8 + 0.5 * 0.4, 1e-15);
    EXPECT_NEAR(occ.d(1, 1), 0.5 * 0.2 + 0.5 * 0.6, 1e-15);
}

TEST(Occupancy, RewardIdentityAcrossRandomPairs) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const int S = 2 + static_cast<int>(seed % 4);
        const int A = 1 + static_cast<int>(seed % 3);
        const int H = 1 + static_cast<int>(seed % 5);
        const auto mdp = random_small(S, A, H, 500 + seed);
        const auto policy = random_policy(H, S, A, 900 + seed);
        const auto occ = occupancy(mdp, policy);
        double total = 0.0;
        for (int h = 0; h < H; ++h) {
            double mass = 0.0;
            for (int s = 0; s < S; ++s) {
                mass += occ.d(h, s);
                for (int a = 0; a < A; ++a) {
                    total += occ.d(h, s) * policy(h, s, a) * mdp.reward(h, s, a);
                }
            }
            EXPECT_NEAR(mass, 1.0, 1e-9);
        }
        EXPECT_NEAR(total, exact_policy_value(mdp, policy)(0, mdp.initial_state()), 1e-8);
    }
}

TEST(PolicyKl, IdenticalAndClosedForm) {
    const auto mdp = random_small(4, 3, 3, 17);
    const auto p = random_policy(3, 4, 3, 5);
    EXPECT_EQ(policy_kl(mdp, p, p), 0.0);

    const auto single = make_mdp(
        1, 2, 1, [](int, int, int) { return 0.0; }, [](int, int, int) { return std::vector<double>{1.0}; });
    const auto p1 = StochasticPolicy(1, 1, 2, {1.0, 0.0});
    const auto p2 = StochasticPolicy(1, 1, 2, {0.5, 0.5});
    EXPECT_NEAR(policy_kl(single, p1, p2), std::log(2.0), 1e-15);
    EXPECT_THROW(policy_kl(single, p2, p1), DivergenceUndefinedError);
}

TEST(PolicyKl, NonnegativeAndZeroOnlyOffSupport) {
    const auto mdp = random_mdp({4, 2, 3, 0, 0.0, true}, 70);
    const auto base = random_policy(3, 4, 2, 71);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        EXPECT_GE(policy_kl(mdp, base, random_policy(3, 4, 2, seed)), 0.0);
    }
    // Changing a row at an unvisited state leaves the divergence at zero.
    const auto det = StochasticPolicy::deterministic(3, 4, 2, std::vector<int>(12, 0));
    const auto occ = occupancy(mdp, det);
    std::vector<double> probs = det.table().data();
    for (int s = 0; s < 4; ++s) {
        if (occ.d(2, s) == 0.0) {
            probs[(2 * 4 + s) * 2 + 0] = 0.5;
            probs[(2 * 4 + s) * 2 + 1] = 0.5;
        }
    }
    EXPECT_EQ(policy_kl(mdp, det, StochasticPolicy(3, 4, 2, probs)), 0.0);
}

TEST(PolicyKl, MatchesMonteCarloEstimate) {
    const auto mdp = random_small(3, 3, 4, 88);
    const auto opt = exact_optimal_value(mdp);
    std::vector<double> mixed(opt.greedy.table().data());
    for (double& p : mixed) {
        p = 0.6 * p + 0.4 / 3.0;
    }
    const PolicyPrior prior(4, 3, 3, mixed);
    // The Monte-Carlo oracle needs a stochastic p1 for a nonzero variance;
    // use a smoothed optimum.
    const auto p1 = random_policy(4, 3, 3, 3);
    for (const StochasticPolicy* pol : {&opt.greedy, &p1}) {
        const double exact = policy_kl(mdp, *pol, prior);
        const auto est = oracle::mc_policy_kl(
            mdp, [&](int h, int s, int a) { return (*pol)(h, s, a); },
            [&](int h, int s, int a) { return prior(h, s, a); }, 50000, 99);
        EXPECT_LE(std::abs(est.mean - exact), 3.0 * est.stderr_ + 1e-12)
            << "exact " << exact << " mc " << est.mean << " se " << est.stderr_;
    }
}
