// Small end-to-end tour: encode a toy training set, run the three classifiers,
// then train and query a d = 2 weighted ensemble.

#include <qens/qens.hpp>

#include <cstdio>

int main() {
    using namespace qens;

    Dataset train;
    train.features = {{0.9, 0.1}, {0.8, 0.3}, {0.7, 0.2}, {0.1, 0.9}, {0.2, 0.8}, {0.3, 0.7}};
    train.labels = {1, 1, 1, -1, -1, -1};
    const auto enc = encode_training_set(train);
    const Vector x = unit_normalize(Vector{0.75, 0.25});

    for (auto kind : {ClassifierKind::cosine, ClassifierKind::distance, ClassifierKind::swap}) {
        const auto out = run_classifier(kind, enc, x);
        std::printf("%-8s raw %.6f  score %+.6f  label %+d\n", to_string(kind).c_str(), out.raw, out.score, out.label);
    }

    EnsembleConfig cfg;
    cfg.d = 2;
    cfg.kind = ClassifierKind::distance;
    const auto enc_e = encode_for_ensemble(train);

    std::vector<Vector> validation;
    for (const auto& row : train.features) validation.push_back(unit_normalize(row));
    const auto outputs = run_train_mode(cfg, enc_e, validation);
    FitReport report;
    const auto model = fit_stacking(outputs, train.labels, {}, &report);
    std::printf("stacking loss %.4f -> %.4f in %d iterations\n", report.initial_loss, report.final_loss,
                report.iterations);
    for (std::size_t c = 0; c < model.w.size(); ++c) std::printf("  w[%zu] = %.4f\n", c, model.w[c]);

    const auto est = run_test_mode(cfg, model.w, enc_e, x);
    std::printf("ensemble P(out = 0) %.6f, selection %.4f, label %+d\n", est.expectation, est.selection_probability,
                predict(model, est.expectation));
}
