#include <qens/bounded_minimize.hpp>
#include <qens/selftest.hpp>
#include <qens/trainer.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace qens;

namespace {

TrainOutputs outputs_from(std::vector<std::vector<double>> p, std::vector<std::vector<double>> p0) {
    TrainOutputs out;
    out.p = std::move(p);
    out.p0 = std::move(p0);
    return out;
}

}  // namespace

TEST(EnsembleOutput, HandWorkedValue) {
    EXPECT_NEAR(ensemble_output(std::vector<double>{0.5, 0.5}, std::vector<double>{0.2, 0.8},
                                std::vector<double>{1.0, 0.0}),
                0.2, 1e-15);
}

TEST(EnsembleOutput, SingleBranchAndUniformMean) {
    EXPECT_EQ(ensemble_output(std::vector<double>{1.0}, std::vector<double>{0.7}, std::vector<double>{0.3}), 0.3);
    const std::vector<double> p0{0.1, 0.4, 0.7, 0.2};
    EXPECT_NEAR(ensemble_output(std::vector<double>(4, 0.25), std::vector<double>(4, 0.25), p0), 0.35, 1e-15);
}

TEST(EnsembleOutput, ZeroDenominator) {
    EXPECT_THROW(ensemble_output(std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 1.0},
                                 std::vector<double>{0.5, 0.5}),
                 DegenerateCombination);
}

TEST(LogLoss, ZeroLogitIsLn2) {
    const auto out = outputs_from({{0.5, 0.5}, {0.3, 0.7}}, {{0.2, 0.9}, {0.6, 0.1}});
    const StackingModel m{{0.5, 0.5}, 0.0, 0.0};
    EXPECT_NEAR(log_loss(m, out, logistic_targets(std::vector<int>{1, -1})), std::log(2.0), 1e-15);
}

TEST(LogLoss, SeparatedOutputsApproachZero) {
    // Class +1 has E = 0.9, class -1 has E = 0.1; z = k (E - 0.5).
    const auto out = outputs_from({{1.0}, {1.0}}, {{0.9}, {0.1}});
    const auto t = logistic_targets(std::vector<int>{1, -1});
    double prev = std::numeric_limits<double>::infinity();
    for (double k : {1.0, 5.0, 20.0, 40.0, 50.0}) {
        const double loss = log_loss({{1.0}, -0.5 * k, k}, out, t);
        EXPECT_LT(loss, prev);
        prev = loss;
    }
    EXPECT_LT(prev, 1e-8);
}

TEST(LogLoss, ClampKeepsLossFinite) {
    const auto out = outputs_from({{1.0}}, {{1.0}});
    const double loss = log_loss({{1.0}, -1e6, 1.0}, out, logistic_targets(std::vector<int>{1}));
    EXPECT_NEAR(loss, -std::log(1e-12), 1e-6);
}

TEST(LogLoss, GradientMatchesFiniteDifferences) {
    const auto r = selftest::trainer_gradient(100, 71);
    EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Fit, NeverIncreasesLoss) {
    const auto r = selftest::trainer_monotone(100, 72);
    EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Fit, WeightsAreNonNegativeAndSumToOne) {
    selftest::Rng rng(73);
    for (int t = 0; t < 30; ++t) {
        const auto out = selftest::random_train_outputs(rng, 20, 8);
        const auto model = fit_stacking(out, selftest::random_labels(rng, 20));
        double total = 0.0;
        for (double w : model.w) {
            EXPECT_GE(w, 0.0);
            total += w;
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(Fit, InformativeBranchGetsTheMass) {
    // Branch 0 tracks the label, branch 1 is anti-informative noise.
    const std::vector<int> labels{1, 1, 1, -1, -1, -1, 1, -1};
    TrainOutputs out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out.p.push_back({0.5, 0.5});
        const double noise = 0.05 * static_cast<double>(i % 3);
        out.p0.push_back({labels[i] > 0 ? 0.9 : 0.1, 0.4 + noise});
    }
    const auto model = fit_stacking(out, labels);
    EXPECT_GE(model.w[0], model.w[1]);

    // Brute force over w0 with (b, k) on a grid confirms the direction.
    const auto t = logistic_targets(labels);
    double best = std::numeric_limits<double>::infinity(), best_w0 = -1.0;
    for (int a = 0; a <= 20; ++a) {
        const double w0 = a / 20.0;
        for (double k = 0.5; k <= 40.0; k += 0.5)
            for (double b = -30.0; b <= 30.0; b += 0.25) {
                const double loss = log_loss({{w0, 1.0 - w0}, b, k}, out, t);
                if (loss < best) {
                    best = loss;
                    best_w0 = w0;
                }
            }
    }
    EXPECT_GE(best_w0, 0.5);
    FitReport report;
    fit_stacking(out, labels, {}, &report);
    EXPECT_LE(report.final_loss, best + 1e-9);
}

TEST(Fit, NoSignalStaysAtLn2) {
    const std::vector<int> labels{1, -1, 1, -1, 1, -1};
    TrainOutputs out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out.p.push_back({0.3, 0.7});
        out.p0.push_back({0.6, 0.2});
    }
    FitReport report;
    fit_stacking(out, labels, {}, &report);
    EXPECT_NEAR(report.final_loss, std::log(2.0), 1e-6);
}

TEST(Fit, DegenerateInputs) {
    const auto out = outputs_from({{1.0}, {1.0}}, {{0.9}, {0.1}});
    EXPECT_THROW(fit_stacking(out, std::vector<int>{1, 1}), DegenerateLabels);
    const auto one = outputs_from({{1.0}}, {{0.9}});
    EXPECT_THROW(fit_stacking(one, std::vector<int>{1}), DegenerateLabels);
    OptimizerConfig bad;
    bad.max_iterations = 0;
    EXPECT_THROW(fit_stacking(out, std::vector<int>{1, -1}, bad), UsageError);
}

TEST(Predict, Rule) {
    const StackingModel m{{1.0}, -0.5, 1.0};
    EXPECT_EQ(predict(m, 0.7), 1);
    EXPECT_EQ(predict(m, 0.3), -1);
    EXPECT_EQ(predict(m, 0.5), 1);
    EXPECT_THROW(predict({{1.0}, 0.0, 0.0}, 0.5), DegenerateModel);
}

TEST(Predict, SigmoidIdentity) {
    selftest::Rng rng(74);
    std::normal_distribution<double> g(0.0, 5.0);
    for (int t = 0; t < 1000; ++t) {
        const double z = g(rng);
        const int via_sigmoid = sigmoid(z) - 0.5 >= 0.0 ? 1 : -1;
        EXPECT_EQ(via_sigmoid, sign_with_tiebreak(z)) << z;
    }
}

TEST(Rescaling, EnsembleOutputInvariant) {
    const auto r = selftest::trainer_rescaling(200, 75);
    EXPECT_TRUE(r.passed) << r.detail;
}

TEST(SignedWeights, MatchesDirectDotProduct) {
    selftest::Rng rng(76);
    std::normal_distribution<double> g;
    for (int t = 0; t < 100; ++t) {
        const std::size_t C = std::size_t{1} << selftest::uniform_int(rng, 1, 3);
        std::vector<double> w(C), beta(C);
        for (auto& v : w) v = g(rng);
        for (auto& v : beta) v = g(rng);
        double shift = 0.0;
        for (double v : w) shift = std::max(shift, -v);
        shift += 0.5;
        auto run = [&](std::span<const double> u) {
            double s = 0.0;
            for (std::size_t c = 0; c < C; ++c) s += u[c] * beta[c];
            return s;
        };
        double direct = 0.0, l1 = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            direct += w[c] * beta[c];
            l1 += std::abs(w[c]);
        }
        EXPECT_NEAR(signed_weight_combine(w, shift, run), direct / l1, 1e-9);
    }
}

TEST(SignedWeights, ConstantBetaAndLargeShift) {
    const std::vector<double> w{0.2, 0.5, 0.3};
    auto constant = [](std::span<const double> u) {
        double s = 0.0;
        for (double v : u) s += 0.7 * v;
        return s;
    };
    EXPECT_NEAR(signed_weight_combine(w, 1.0, constant), 0.7, 1e-12);

    const std::vector<double> beta{1.0, -2.0, 0.5};
    auto run = [&](std::span<const double> u) {
        double s = 0.0;
        for (std::size_t c = 0; c < 3; ++c) s += u[c] * beta[c];
        return s;
    };
    const double direct = run(w);  // w already sums to one
    for (double shift : {1.0, 1e3, 1e6}) EXPECT_NEAR(signed_weight_combine(w, shift, run), direct, 1e-9 * shift);
}

TEST(SignedWeights, Preconditions) {
    auto run = [](std::span<const double>) { return 0.0; };
    EXPECT_THROW(signed_weight_combine(std::vector<double>{-1.0, 1.0}, 0.5, run), UsageError);
    EXPECT_THROW(signed_weight_combine(std::vector<double>{1.0}, 0.0, run), UsageError);
}

TEST(BoundedMinimize, ProjectsOntoBox) {
    // min (x + 1)^2 + (y - 2)^2 + x y / 4 subject to x >= 0.
    Objective f = [](const std::vector<double>& v, std::vector<double>& g) {
        const double x = v[0], y = v[1];
        g = {2 * (x + 1) + y / 4, 2 * (y - 2) + x / 4};
        return (x + 1) * (x + 1) + (y - 2) * (y - 2) + x * y / 4;
    };
    const double inf = std::numeric_limits<double>::infinity();
    const auto r = bounded_minimize(f, {3.0, -4.0}, {{0.0, -inf}, {inf, inf}});
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.x[0], 0.0, 1e-12);
    EXPECT_NEAR(r.x[1], 2.0, 1e-8);
    EXPECT_LT(r.value, r.initial_value);
}

TEST(BoundedMinimize, Rosenbrock) {
    Objective f = [](const std::vector<double>& v, std::vector<double>& g) {
        const double x = v[0], y = v[1];
        g = {-2 * (1 - x) - 400 * x * (y - x * x), 200 * (y - x * x)};
        return (1 - x) * (1 - x) + 100 * (y - x * x) * (y - x * x);
    };
    const double inf = std::numeric_limits<double>::infinity();
    MinimizeOptions opt;
    opt.max_iterations = 2000;
    const auto r = bounded_minimize(f, {-1.2, 1.0}, {{-inf, -inf}, {inf, inf}}, opt);
    EXPECT_NEAR(r.x[0], 1.0, 1e-6);
    EXPECT_NEAR(r.x[1], 1.0, 1e-6);
}
