#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gbe/core.hpp"
#include "gbe/costs.hpp"
#include "gbe/random.hpp"
#include "random_msop.hpp"

namespace gbe {
namespace {

Trajectory scalar_trajectory(std::vector<double> xs, std::vector<double> us) {
  Trajectory tr;
  for (double x : xs) tr.states.push_back(Vec{x});
  for (double u : us) tr.inputs.push_back(Vec{u});
  return tr;
}

Trajectory random_trajectory(std::mt19937_64& rng, int T) {
  Trajectory tr;
  for (int k = 0; k <= T; ++k) tr.states.push_back(Vec{uniform(rng, -1, 1)});
  for (int k = 0; k < T; ++k) tr.inputs.push_back(Vec{uniform(rng, -1, 1)});
  return tr;
}

// Smooth test costs shared by several closed-form checks.
double ctilde(const Vec& x, const Vec& u, int t) { return 0.3 * x[0] - 0.7 * u[0] * u[0] + 0.1 * t; }
double cterm(const Vec& x) { return std::abs(x[0]) + 0.2; }

TEST(AdditiveMaps, ZeroCostsGiveZero) {
  const RepMaps maps = additive_maps({4, [](const Vec&, const Vec&, int) { return 0.0; }, [](const Vec&) { return 0.0; }});
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) EXPECT_EQ(evaluate_cost(maps, random_trajectory(rng, 4)), 0.0);
  EXPECT_TRUE(maps.all_strict());
}

TEST(AdditiveMaps, Lemma3AdditivePart) {
  const double h = 0.75;
  StageCostSet c{3,
                 [](const Vec&, const Vec& u, int t) { return t == 0 ? -u[0] : t == 1 ? u[0] : -u[0] / 2.0; },
                 [](const Vec&) { return 0.0; }};
  EXPECT_DOUBLE_EQ(evaluate_cost(additive_maps(c), scalar_trajectory({0, h, 0, h}, {h, -h, h})), -2.5 * h);
}

TEST(MaxMaps, ConstantsAndNonStrictFlag) {
  const RepMaps maps = max_maps({3, [](const Vec&, const Vec&, int) { return -1.0; }, [](const Vec&) { return -1.0; }});
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) EXPECT_EQ(evaluate_cost(maps, random_trajectory(rng, 3)), -1.0);
  EXPECT_FALSE(maps.strict_at(0));
}

TEST(MultiplicativeMaps, PointMassIdentityAndPowers) {
  StageCostSet ones{3, [](const Vec&, const Vec&, int) { return 1.0; }, [](const Vec& x) { return 5.0 + x[0]; }};
  StageCostSet twos{3, [](const Vec&, const Vec&, int) { return 2.0; }, [](const Vec&) { return 1.0; }};
  const std::vector<StageSample> samples{{Vec{0}, Vec{0}, 0}, {Vec{0}, Vec{0}, 1}, {Vec{0}, Vec{0}, 2}};
  const auto tr = scalar_trajectory({0, 0, 0, 0.5}, {0, 0, 0});
  EXPECT_EQ(evaluate_cost(multiplicative_maps(MultiplicativeCostSet::deterministic(ones), samples), tr), 5.5);
  EXPECT_EQ(evaluate_cost(multiplicative_maps(MultiplicativeCostSet::deterministic(twos), samples), tr), 8.0);
}

TEST(MultiplicativeMaps, ExponentialOfAdditiveCost) {
  const int T = 5;
  StageCostSet additive{T, ctilde, cterm};
  StageCostSet expd{T, [](const Vec& x, const Vec& u, int t) { return std::exp(ctilde(x, u, t)); },
                    [](const Vec& x) { return std::exp(cterm(x)); }};
  std::mt19937_64 rng(3);
  std::vector<StageSample> samples;
  for (int t = 0; t < T; ++t) samples.push_back({Vec{0.1}, Vec{0.2}, t});
  const RepMaps mult = multiplicative_maps(MultiplicativeCostSet::deterministic(expd), samples);
  const RepMaps add = additive_maps(additive);
  for (int k = 0; k < 200; ++k) {
    const auto tr = random_trajectory(rng, T);
    EXPECT_NEAR(evaluate_cost(mult, tr), std::exp(evaluate_cost(add, tr)), 1e-12 * std::exp(evaluate_cost(add, tr)));
  }
}

TEST(MultiplicativeMaps, GaussLegendreExpectation) {
  // c_t(x,u,w) = 1 + w with w uniform on [0,1]: each factor integrates to 1.5.
  MultiplicativeCostSet c;
  c.horizon = 2;
  c.stage = [](const Vec&, const Vec&, double w, int) { return 1.0 + w; };
  c.terminal = [](const Vec&, double w) { return 2.0 * w; };
  c.density = [](const Vec&, const Vec&, double, int) { return 1.0; };
  c.terminal_density = [](const Vec&, double) { return 1.0; };
  c.stage_rule = QuadratureRule::gauss_legendre(0.0, 1.0);
  c.terminal_rule = QuadratureRule::gauss_legendre(0.0, 1.0);
  const std::vector<StageSample> samples{{Vec{0}, Vec{0}, 0}, {Vec{0}, Vec{0}, 1}};
  EXPECT_NEAR(evaluate_cost(multiplicative_maps(c, samples), scalar_trajectory({0, 0, 0}, {0, 0})), 1.5 * 1.5 * 1.0,
              1e-12);
}

TEST(MultiplicativeMaps, UnnormalizedDensityRejected) {
  MultiplicativeCostSet c = MultiplicativeCostSet::deterministic(
      {1, [](const Vec&, const Vec&, int) { return 1.0; }, [](const Vec&) { return 1.0; }});
  c.density = [](const Vec&, const Vec&, double, int) { return 0.5; };
  const std::vector<StageSample> samples{{Vec{0}, Vec{0}, 0}};
  EXPECT_THROW(multiplicative_maps(c, samples), ValidationError);
}

TEST(StoppedAdditiveMaps, NeverStoppingIsAdditive) {
  const int T = 4;
  StageCostSet c{T, ctilde, cterm};
  StoppingProbSet p{T, [](const Vec&, const Vec&, int) { return 0.0; }, [](const Vec&) { return 1.0; }};
  const std::vector<StageSample> samples{{Vec{0}, Vec{0}, 0}};
  const RepMaps stopped = stopped_additive_maps(c, p, samples);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 100; ++k) {
    const auto tr = random_trajectory(rng, T);
    EXPECT_NEAR(evaluate_cost(stopped, tr), evaluate_cost(additive_maps(c), tr), 1e-12);
  }
}

TEST(StoppedAdditiveMaps, CertainStopAtZero) {
  const int T = 3;
  StageCostSet c{T, ctilde, cterm};
  StoppingProbSet p{T, [](const Vec&, const Vec&, int t) { return t == 0 ? 1.0 : 0.3; }, [](const Vec&) { return 1.0; }};
  const std::vector<StageSample> samples{{Vec{0}, Vec{0}, 0}, {Vec{0}, Vec{0}, 1}};
  const RepMaps maps = stopped_additive_maps(c, p, samples);
  EXPECT_FALSE(maps.strict_at(0));
  EXPECT_TRUE(maps.strict_at(1));
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const auto tr = random_trajectory(rng, T);
    EXPECT_DOUBLE_EQ(evaluate_cost(maps, tr), ctilde(tr.states[0], tr.inputs[0], 0));
  }
}

TEST(StoppedAdditiveMaps, TerminalDeficitNeedsTrajectories) {
  StageCostSet c{2, ctilde, cterm};
  StoppingProbSet p{2, [](const Vec&, const Vec&, int) { return 0.0; }, [](const Vec&) { return 0.9; }};
  const std::vector<StageSample> samples{{Vec{0}, Vec{0}, 0}};
  EXPECT_THROW(stopped_additive_maps(c, p, samples), ValidationError);
  const std::vector<Trajectory> trs{scalar_trajectory({0, 0, 0}, {0, 0})};
  EXPECT_THROW(stopped_additive_maps(c, p, samples, trs), ValidationError);
}

TEST(MinTimeMaps, EntryStages) {
  const TargetSet s{[](const Vec& x) { return x[0] - 0.5; }};  // S = {x < 0.5}
  const RepMaps maps = min_time_maps(s, 5);
  EXPECT_EQ(evaluate_cost(maps, scalar_trajectory({0, 1, 1, 1, 1, 1}, {0, 0, 0, 0, 0})), 0.0);
  EXPECT_EQ(evaluate_cost(maps, scalar_trajectory({1, 1, 0, 1, 0, 1}, {0, 0, 0, 0, 0})), 2.0);
  EXPECT_EQ(evaluate_cost(maps, scalar_trajectory({1, 1, 1, 1, 1, 1}, {0, 0, 0, 0, 0})), 5.0);
  EXPECT_EQ(evaluate_cost(maps, scalar_trajectory({1, 1, 1, 1, 1, 0}, {0, 0, 0, 0, 0})), 5.0);
}

TEST(MinTimeMaps, RangeAndStoppedEquivalence) {
  const int T = 7;
  const TargetSet s{[](const Vec& x) { return x[0] * x[0] - 0.2; }};
  const RepMaps mt = min_time_maps(s, T);
  const auto [costs, probs] = min_time_stopping_data(s, T);
  std::vector<StageSample> samples;
  std::mt19937_64 rng(6);
  for (int k = 0; k < 200; ++k) samples.push_back({Vec{uniform(rng, -1, 1)}, Vec{0}, static_cast<int>(k % T)});
  const RepMaps st = stopped_additive_maps(costs, probs, samples);
  for (int k = 0; k < 1000; ++k) {
    const auto tr = random_trajectory(rng, T);
    const double j = evaluate_cost(mt, tr);
    EXPECT_EQ(j, std::round(j));
    EXPECT_GE(j, 0.0);
    EXPECT_LE(j, T);
    int first = T;
    for (int t = 0; t <= T; ++t) {
      if (s.contains(tr.states[t])) {
        first = t;
        break;
      }
    }
    EXPECT_EQ(j, first);
    EXPECT_EQ(evaluate_cost(st, tr), j);
  }
  // Pointwise identity of the maps themselves.
  for (int k = 0; k < 1000; ++k) {
    const Vec x{uniform(rng, -1, 1)};
    const int t = static_cast<int>(uniform_index(rng, T));
    const double z = uniform(rng, 0, T);
    EXPECT_EQ(mt.stage(x, Vec{0}, z, t), st.stage(x, Vec{0}, z, t));
  }
  EXPECT_EQ(mt.terminal(Vec{0.0}), T);
}

TEST(ClosedForm, EveryFamilyOnRandomTrajectories) {
  std::mt19937_64 rng(7);
  for (auto fam : testing::kAllFamilies) {
    int checked = 0;
    while (checked < 1000) {
      const auto inst = testing::random_instance(fam, rng);
      for (int k = 0; k < 20; ++k, ++checked) {
        Trajectory tr;
        tr.states.push_back(*inst.msop.initial_state);
        for (int t = 0; t < inst.msop.horizon; ++t) {
          const Vec u = inst.msop.inputs[uniform_index(rng, inst.msop.inputs.size())];
          tr.inputs.push_back(u);
          tr.states.push_back(inst.msop.dynamics(tr.states.back(), u, t));
        }
        ASSERT_NEAR(evaluate_cost(inst.msop.rep_maps, tr), inst.closed_form(tr), 1e-10) << testing::family_name(fam);
      }
    }
  }
}

TEST(TotalProbability, TerminalCertaintyHoldsForAnyStageProbabilities) {
  std::mt19937_64 rng(8);
  StoppingProbSet p{4, [](const Vec& x, const Vec& u, int t) { return std::abs(std::sin(x[0] + u[0] + t)); },
                    [](const Vec&) { return 1.0; }};
  std::vector<Trajectory> trs;
  for (int k = 0; k < 100; ++k) trs.push_back(random_trajectory(rng, 4));
  EXPECT_TRUE(check_total_probability(p, trs).passed());
}

TEST(TotalProbability, GeometricHalves) {
  StoppingProbSet p{2, [](const Vec&, const Vec&, int) { return 0.5; }, [](const Vec&) { return 1.0; }};
  const std::vector<Trajectory> trs{scalar_trajectory({0, 0, 0}, {0, 0})};
  const auto r = check_total_probability(p, trs);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.samples, 1u);
}

TEST(TotalProbability, MassDeficitReported) {
  StoppingProbSet p{3, [](const Vec&, const Vec&, int) { return 0.0; }, [](const Vec&) { return 0.9; }};
  const std::vector<Trajectory> trs{scalar_trajectory({0, 0, 0, 0}, {0, 0, 0})};
  const auto r = check_total_probability(p, trs);
  EXPECT_FALSE(r.passed());
  ASSERT_TRUE(r.counterexample.has_value());
  EXPECT_EQ(r.counterexample->states.size(), 4u);
}

TEST(CheckMonotone, AdditiveNeverViolates) {
  std::mt19937_64 rng(9);
  const RepMaps maps = additive_maps({3, ctilde, cterm});
  const auto samples = sample_monotone(Vec{-1}, Vec{1}, InputSet::uniform(Vec{-1}, Vec{1}, {5}), 3, 2000, -5, 5, rng);
  const auto r = check_monotone(maps, samples);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.samples, 2000u);
}

TEST(CheckMonotone, MaxAcceptsTiesUnderNonStrictFlag) {
  const RepMaps maps = max_maps({2, [](const Vec&, const Vec&, int) { return 3.0; }, cterm});
  // z > w but both below the stage cost: equal outputs, allowed when non-strict.
  const std::vector<MonotoneSample> samples{{Vec{0}, Vec{0}, 0, 1.0, 1.0}, {Vec{0}, Vec{0}, 1, 2.0, 1.0}};
  EXPECT_TRUE(check_monotone(maps, samples).passed());
}

TEST(CheckMonotone, StrictFlagCatchesFlatMap) {
  RepMaps maps = max_maps({2, [](const Vec&, const Vec&, int) { return 3.0; }, cterm});
  maps.strict.assign(2, 1);
  const std::vector<MonotoneSample> samples{{Vec{0}, Vec{0}, 0, 2.0, 1.0}};
  EXPECT_FALSE(check_monotone(maps, samples).passed());
}

TEST(CheckMonotone, NegationReportedOnFirstStrictSample) {
  RepMaps maps = additive_maps({2, ctilde, cterm});
  maps.stage = [](const Vec&, const Vec&, double z, int) { return -z; };
  const std::vector<MonotoneSample> samples{{Vec{0}, Vec{0}, 0, 1.0, 1.0}, {Vec{0}, Vec{0}, 0, 2.0, 1.0}};
  const auto r = check_monotone(maps, samples);
  EXPECT_EQ(r.violation_count, 1u);
  ASSERT_FALSE(r.violations.empty());
}

TEST(TargetSet, OpenBoxExcludesBoundary) {
  const TargetSet s = TargetSet::open_box(Vec{0.75, -0.75}, 0.25);
  EXPECT_TRUE(s.contains(Vec{0.75, -0.75}));
  EXPECT_FALSE(s.contains(Vec{1.0, -0.75}));
  EXPECT_TRUE(s.contains(Vec{0.99, -0.51}));
}

}  // namespace
}  // namespace gbe
