// Logistic stacking over the internal classifiers' outputs.
//
// For validation sample i the ensemble output is
//   E_i(w) = sum_c w_c p_ci e_ci / sum_c w_c p_ci
// and the model is sigma(k E_i + b), fitted by minimizing the mean log-loss
// with w >= 0. The logistic target is 1 for class +1, so sign(k E + b) is the
// predicted label.

#pragma once

#include <qens/bounded_minimize.hpp>
#include <qens/classifiers.hpp>
#include <qens/ensemble.hpp>
#include <qens/errors.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace qens {

struct StackingModel {
    std::vector<double> w;
    double b = 0.0;
    double k = 1.0;
};

struct OptimizerConfig {
    int max_iterations = 500;
    double gradient_tolerance = 1e-9;
    double initial_scale = 10.0;  // k at the start; w starts uniform and b at 0
};

inline constexpr double kProbabilityClamp = 1e-12;

inline double ensemble_output(std::span<const double> w, std::span<const double> p_row,
                              std::span<const double> p0_row) {
    if (w.size() != p_row.size() || w.size() != p0_row.size()) throw UsageError("ensemble_output: length mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) {
        num += w[c] * p_row[c] * p0_row[c];
        den += w[c] * p_row[c];
    }
    if (!(den > 0.0)) throw DegenerateCombination("sum_c w_c p_c vanishes");
    return num / den;
}

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// Targets for the log-loss: 1 for label +1, 0 for label -1.
inline std::vector<int> logistic_targets(std::span<const int> labels) {
    std::vector<int> t;
    t.reserve(labels.size());
    for (int y : labels) {
        if (y != 1 && y != -1) throw UsageError("labels must be +1 or -1");
        t.push_back(y == 1 ? 1 : 0);
    }
    return t;
}

// Mean log-loss and, if `grad` is given, its gradient laid out as (w..., b, k).
inline double log_loss(const StackingModel& model, const TrainOutputs& outputs, std::span<const int> targets,
                       std::vector<double>* grad = nullptr) {
    const std::size_t n = outputs.samples(), C = model.w.size();
    if (targets.size() != n) throw UsageError("log_loss: one target per validation sample");
    if (n == 0) throw UsageError("log_loss: empty validation set");
    if (grad) grad->assign(C + 2, 0.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = outputs.p[i];
        const auto& e = outputs.p0[i];
        if (p.size() != C) throw UsageError("log_loss: branch count mismatch");
        double num = 0.0, den = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            num += model.w[c] * p[c] * e[c];
            den += model.w[c] * p[c];
        }
        if (!(den > 0.0)) throw DegenerateCombination("sum_c w_c p_c vanishes for sample " + std::to_string(i));
        const double E = num / den;
        const double z = model.k * E + model.b;
        const double s = sigmoid(z);
        const double sc = std::clamp(s, kProbabilityClamp, 1.0 - kProbabilityClamp);
        const int t = targets[i];
        loss -= t ? std::log(sc) : std::log(1.0 - sc);
        if (!grad || sc != s) continue;
        const double dz = s - t;
        for (std::size_t c = 0; c < C; ++c) (*grad)[c] += dz * model.k * p[c] * (e[c] - E) / den;
        (*grad)[C] += dz;
        (*grad)[C + 1] += dz * E;
    }
    if (grad)
        for (auto& v : *grad) v /= static_cast<double>(n);
    return loss / static_cast<double>(n);
}

struct FitReport {
    double initial_loss = 0.0;
    double final_loss = 0.0;
    int iterations = 0;
    bool converged = false;
};

inline StackingModel initial_model(std::size_t branches, const OptimizerConfig& cfg) {
    return {std::vector<double>(branches, 1.0 / static_cast<double>(branches)), 0.0, cfg.initial_scale};
}

// Bounded minimization of the log-loss; the returned w sums to one.
inline StackingModel fit_stacking(const TrainOutputs& outputs, std::span<const int> labels,
                                  const OptimizerConfig& cfg = {}, FitReport* report = nullptr) {
    if (cfg.max_iterations < 1 || !(cfg.gradient_tolerance > 0.0)) throw UsageError("invalid optimizer config");
    const auto targets = logistic_targets(labels);
    const int positives = std::accumulate(targets.begin(), targets.end(), 0);
    if (targets.size() < 2 || positives == 0 || positives == static_cast<int>(targets.size()))
        throw DegenerateLabels("stacking needs at least two samples from both classes");

    const std::size_t C = outputs.branches();
    const StackingModel init = initial_model(C, cfg);
    auto unpack = [C](const std::vector<double>& x) {
        StackingModel m;
        m.w.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(C));
        m.b = x[C];
        m.k = x[C + 1];
        return m;
    };
    Objective objective = [&](const std::vector<double>& x, std::vector<double>& g) {
        return log_loss(unpack(x), outputs, targets, &g);
    };

    std::vector<double> x0 = init.w;
    x0.push_back(init.b);
    x0.push_back(init.k);
    const double inf = std::numeric_limits<double>::infinity();
    Bounds bounds{std::vector<double>(C + 2, 0.0), std::vector<double>(C + 2, inf)};
    bounds.lower[C] = bounds.lower[C + 1] = -inf;

    const auto res = bounded_minimize(objective, x0, bounds, {cfg.max_iterations, cfg.gradient_tolerance, 10});
    StackingModel model = unpack(res.x);
    const double total = std::accumulate(model.w.begin(), model.w.end(), 0.0);
    for (auto& v : model.w) v /= total;
    if (report) *report = {res.initial_value, res.value, res.iterations, res.converged};
    return model;
}

inline int predict(const StackingModel& model, double expectation) {
    if (model.k == 0.0) throw DegenerateModel("scale k is zero");
    return sign_with_tiebreak(model.k * expectation + model.b);
}

// Runs a signed weight vector through a positive-weights-only evaluator.
// `run` receives weights that sum to one and returns sum_c u_c beta_c. The
// result is w^T beta / |w|_1, assembled from a run with w + shift and a run
// with the uniform shift alone.
inline double signed_weight_combine(std::span<const double> w_signed, double b_shift,
                                    const std::function<double(std::span<const double>)>& run) {
    if (!(b_shift > 0.0)) throw UsageError("shift must be positive");
    const std::size_t C = w_signed.size();
    std::vector<double> shifted(C), uniform(C, 1.0 / static_cast<double>(C));
    double shifted_norm = 0.0, w_norm = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
        shifted[c] = w_signed[c] + b_shift;
        if (!(shifted[c] > 0.0)) throw UsageError("shifted weight is not positive");
        shifted_norm += shifted[c];
        w_norm += std::abs(w_signed[c]);
    }
    if (!(w_norm > 0.0)) throw UsageError("weight vector is zero");
    for (auto& v : shifted) v /= shifted_norm;
    const double shift_norm = b_shift * static_cast<double>(C);
    return (shifted_norm * run(shifted) - shift_norm * run(uniform)) / w_norm;
}

}  // namespace qens
