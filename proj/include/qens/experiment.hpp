// Monte Carlo cross-validation harness: repeated random train/test splits,
// per-split normalization, and evaluation of the single classifier, every
// internal classifier of the ensemble and the weighted ensemble.

#pragma once

#include <qens/classifiers.hpp>
#include <qens/dataset_io.hpp>
#include <qens/encoding.hpp>
#include <qens/ensemble.hpp>
#include <qens/errors.hpp>
#include <qens/trainer.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace qens {

enum class WeightSource { training, holdout };

struct ExperimentConfig {
    std::vector<std::string> datasets;
    std::vector<NormalizationKind> normalizations{NormalizationKind::standard};
    std::vector<ClassifierKind> kinds{ClassifierKind::distance};
    std::vector<int> d_values{3};
    ExecutionMode mode = ExecutionMode::exact;
    std::size_t shots = kDefaultShots;
    int runs = 10;
    double train_fraction = 0.8;
    std::uint64_t seed = 1;
    std::string output;
    std::string format = "csv";
    WeightSource weights = WeightSource::training;
    double holdout_fraction = 0.2;  // share of the training part used for weights when weights = holdout
    int threads = 1;                // 0: one per hardware thread

    void validate() const {
        if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("split must lie in (0, 1)");
        if (runs < 1) throw ConfigError("runs must be at least 1");
        if (normalizations.empty() || kinds.empty() || d_values.empty()) throw ConfigError("empty experiment grid");
        for (int d : d_values)
            if (d < 0 || d > 8) throw ConfigError("d must lie in [0, 8]");
        if (mode == ExecutionMode::sampled && shots < 1) throw ConfigError("shots must be at least 1");
        if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
        if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) throw ConfigError("holdout must lie in (0, 1)");
        if (threads < 0) throw ConfigError("threads must be non-negative");
    }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
    std::istringstream in(v);
    T out{};
    in >> out;
    if (in.fail() || !in.eof()) throw ConfigError("'" + key + "': not a number: '" + v + "'");
    return out;
}

}  // namespace detail

// Flat `key = value` text, one entry per line, '#' starts a comment. List
// values are comma-separated. Relative dataset paths resolve against `base_dir`.
inline ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
    ExperimentConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        const auto items = detail::split_list(value);

        if (key == "datasets" || key == "dataset") {
            cfg.datasets.clear();
            for (const auto& p : items) {
                std::filesystem::path path(p);
                cfg.datasets.push_back(path.is_relative() && !base_dir.empty() ? (base_dir / path).string() : p);
            }
        } else if (key == "normalization" || key == "normalizations") {
            cfg.normalizations.clear();
            for (const auto& s : items) cfg.normalizations.push_back(parse_normalization(s));
        } else if (key == "kind" || key == "kinds" || key == "classifier") {
            cfg.kinds.clear();
            for (const auto& s : items) cfg.kinds.push_back(parse_kind(s));
        } else if (key == "d" || key == "d_values") {
            cfg.d_values.clear();
            for (const auto& s : items) cfg.d_values.push_back(detail::parse_number<int>(key, s));
        } else if (key == "mode") {
            cfg.mode = parse_mode(value);
        } else if (key == "shots") {
            cfg.shots = detail::parse_number<std::size_t>(key, value);
        } else if (key == "runs") {
            cfg.runs = detail::parse_number<int>(key, value);
        } else if (key == "split" || key == "train_fraction") {
            cfg.train_fraction = detail::parse_number<double>(key, value);
        } else if (key == "seed") {
            cfg.seed = detail::parse_number<std::uint64_t>(key, value);
        } else if (key == "output") {
            cfg.output = value;
        } else if (key == "format") {
            cfg.format = value;
        } else if (key == "weights") {
            if (value == "training") cfg.weights = WeightSource::training;
            else if (value == "holdout") cfg.weights = WeightSource::holdout;
            else throw ConfigError("weights must be training or holdout");
        } else if (key == "holdout") {
            cfg.holdout_fraction = detail::parse_number<double>(key, value);
        } else if (key == "threads") {
            cfg.threads = detail::parse_number<int>(key, value);
        } else {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config");
    return parse_experiment_config(in, std::filesystem::path(path).parent_path());
}

struct RunResult {
    std::string dataset;
    NormalizationKind normalization = NormalizationKind::none;
    ClassifierKind kind = ClassifierKind::distance;
    int d = 0;
    ExecutionMode mode = ExecutionMode::exact;
    int run = 0;
    std::uint64_t seed = 0;
    double acc_single = 0.0;
    std::vector<double> acc_internal;  // one per control value
    double acc_ensemble = 0.0;
    double selection_success = 0.0;    // mean exact P(ancilla = 0) over test points
    double elapsed_ms = 0.0;

    double acc_internal_mean() const {
        if (acc_internal.empty()) return 0.0;
        return std::accumulate(acc_internal.begin(), acc_internal.end(), 0.0) / static_cast<double>(acc_internal.size());
    }
};

struct NamedDataset {
    std::string name;
    Dataset data;
};

// Points uniform in [-1, 1]^2 labelled sign(x * y); zero products are redrawn.
inline Dataset xor_benchmark(std::uint64_t seed, std::size_t size) {
    if (size < 8) throw UsageError("XOR benchmark needs at least 8 points");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Dataset data;
    data.feature_names = {"x", "y"};
    while (data.size() < size) {
        const double a = u(rng), b = u(rng);
        if (a * b == 0.0) continue;
        data.features.push_back({a, b});
        data.labels.push_back(a * b > 0.0 ? 1 : -1);
    }
    return data;
}

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Uniform shuffle without stratification; the first round(fraction * N) rows train.
inline Split random_split(std::size_t n, double train_fraction, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    return {{order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train)},
            {order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end()}};
}

namespace detail {

inline bool both_classes(const Dataset& data, std::span<const std::size_t> rows) {
    bool pos = false, neg = false;
    for (auto r : rows) (data.labels[r] > 0 ? pos : neg) = true;
    return pos && neg;
}

inline std::uint64_t tag_seed(std::uint64_t seed, const std::string& tag) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char ch : tag) h = (h ^ ch) * 1099511628211ULL;
    return derive_seed(seed, h);
}

inline double accuracy(std::span<const int> predicted, std::span<const int> truth) {
    std::size_t ok = 0;
    for (std::size_t k = 0; k < truth.size(); ++k) ok += predicted[k] == truth[k];
    return truth.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(truth.size());
}

inline std::vector<Vector> unit_rows(const Dataset& data) {
    std::vector<Vector> rows;
    rows.reserve(data.size());
    for (const auto& r : data.features) rows.push_back(unit_normalize(r));
    return rows;
}

// All rows for one (dataset, run): every normalization x kind x d.
inline std::vector<RunResult> evaluate_run(const ExperimentConfig& cfg, const NamedDataset& ds, int run) {
    using clock = std::chrono::steady_clock;
    const Dataset& data = ds.data;
    std::uint64_t run_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(run));
    Split split = random_split(data.size(), cfg.train_fraction, run_seed);
    if (!both_classes(data, split.train)) {
        run_seed = derive_seed(run_seed, 1);
        split = random_split(data.size(), cfg.train_fraction, run_seed);
        if (!both_classes(data, split.train))
            throw DegenerateLabels(ds.name + ", run " + std::to_string(run) + ": training split has a single class");
    }

    // Rows encoded in the classifier vs rows used to fit the stacking weights.
    std::vector<std::size_t> encoded_rows = split.train, weight_rows = split.train;
    if (cfg.weights == WeightSource::holdout) {
        const auto inner = random_split(split.train.size(), 1.0 - cfg.holdout_fraction, derive_seed(run_seed, 2));
        encoded_rows.clear();
        weight_rows.clear();
        for (auto k : inner.train) encoded_rows.push_back(split.train[k]);
        for (auto k : inner.test) weight_rows.push_back(split.train[k]);
        if (!both_classes(data, weight_rows))
            throw DegenerateLabels(ds.name + ", run " + std::to_string(run) + ": holdout split has a single class");
    }

    const Dataset train_raw = data.subset(split.train);
    std::vector<RunResult> out;
    for (const auto norm : cfg.normalizations) {
        const auto spec = fit_normalization(train_raw, norm);
        const Dataset encoded_part = apply_normalization(spec, data.subset(encoded_rows));
        const Dataset weight_part = apply_normalization(spec, data.subset(weight_rows));
        const Dataset test_part = apply_normalization(spec, data.subset(split.test));
        const auto test_x = unit_rows(test_part);
        const auto weight_x = unit_rows(weight_part);
        const EncodedTrainingSet enc_single = encode_training_set(encoded_part);
        const EncodedTrainingSet enc = encode_for_ensemble(encoded_part);

        for (const auto kind : cfg.kinds) {
            const std::string base_tag = to_string(norm) + "/" + to_string(kind);
            std::vector<int> single_pred;
            for (std::size_t t = 0; t < test_x.size(); ++t) {
                ClassifierOutput o;
                if (cfg.mode == ExecutionMode::exact) {
                    o = run_classifier(kind, enc_single, test_x[t]);
                } else {
                    std::mt19937_64 rng(tag_seed(run_seed, base_tag + "/single/" + std::to_string(t)));
                    try {
                        o = run_classifier_sampled(kind, enc_single, test_x[t], cfg.shots, rng);
                    } catch (const ImpossibleOutcome&) {
                        o = make_output(kind, kind == ClassifierKind::distance ? 0.5 : 0.0);
                    }
                }
                single_pred.push_back(o.label);
            }
            const double acc_single = accuracy(single_pred, test_part.labels);

            for (const int d : cfg.d_values) {
                const auto start = clock::now();
                RunResult row;
                row.dataset = ds.name;
                row.normalization = norm;
                row.kind = kind;
                row.d = d;
                row.mode = cfg.mode;
                row.run = run;
                row.seed = run_seed;
                row.acc_single = acc_single;

                EnsembleConfig ecfg;
                ecfg.d = d;
                ecfg.kind = kind;
                ecfg.mode = cfg.mode;
                ecfg.shots = cfg.shots;
                const std::string tag = base_tag + "/d" + std::to_string(d);

                // Internal classifiers, circuit-free.
                const std::size_t branches = std::size_t{1} << d;
                std::vector<std::size_t> internal_ok(branches, 0);
                for (std::size_t t = 0; t < test_x.size(); ++t) {
                    const auto br = evaluate_branches(ecfg, enc, test_x[t]);
                    for (std::size_t c = 0; c < branches; ++c) internal_ok[c] += br[c].output.label == test_part.labels[t];
                }
                for (auto ok : internal_ok)
                    row.acc_internal.push_back(static_cast<double>(ok) / static_cast<double>(test_x.size()));

                // Weighted ensemble: train-time circuit, stacking, test-time circuit.
                ecfg.seed = tag_seed(run_seed, tag + "/train");
                const auto outputs = run_train_mode(ecfg, enc, weight_x);
                const StackingModel model = fit_stacking(outputs, weight_part.labels);
                std::vector<int> ens_pred;
                double selection = 0.0;
                for (std::size_t t = 0; t < test_x.size(); ++t) {
                    ecfg.seed = tag_seed(run_seed, tag + "/test/" + std::to_string(t));
                    try {
                        const auto est = run_test_mode(ecfg, model.w, enc, test_x[t]);
                        selection += est.selection_probability;
                        ens_pred.push_back(predict(model, est.expectation));
                    } catch (const ImpossibleOutcome&) {
                        ens_pred.push_back(1);
                    }
                }
                row.acc_ensemble = accuracy(ens_pred, test_part.labels);
                row.selection_success = selection / static_cast<double>(test_x.size());
                row.elapsed_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
                out.push_back(std::move(row));
            }
        }
    }
    return out;
}

}  // namespace detail

// Results are ordered by (dataset, run, normalization, kind, d) regardless of
// how many threads evaluate the runs.
inline std::vector<RunResult> monte_carlo_cv(const ExperimentConfig& cfg, const std::vector<NamedDataset>& datasets) {
    cfg.validate();
    for (const auto& ds : datasets) {
        ds.data.validate();
        if (ds.data.size() < 3) throw IngestionError(ds.name + ": too few rows for a split");
    }
    struct Job {
        const NamedDataset* ds;
        int run;
    };
    std::vector<Job> jobs;
    for (const auto& ds : datasets)
        for (int r = 0; r < cfg.runs; ++r) jobs.push_back({&ds, r});

    std::vector<std::vector<RunResult>> per_job(jobs.size());
    const std::size_t workers = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                                  : static_cast<std::size_t>(cfg.threads);
    if (workers <= 1) {
        for (std::size_t k = 0; k < jobs.size(); ++k) per_job[k] = detail::evaluate_run(cfg, *jobs[k].ds, jobs[k].run);
    } else {
        for (std::size_t first = 0; first < jobs.size(); first += workers) {
            std::vector<std::future<std::vector<RunResult>>> batch;
            const std::size_t last = std::min(jobs.size(), first + workers);
            for (std::size_t k = first; k < last; ++k)
                batch.push_back(std::async(std::launch::async, detail::evaluate_run, std::cref(cfg),
                                           std::cref(*jobs[k].ds), jobs[k].run));
            for (std::size_t k = first; k < last; ++k) per_job[k] = batch[k - first].get();
        }
    }
    std::vector<RunResult> out;
    for (auto& rows : per_job)
        for (auto& r : rows) out.push_back(std::move(r));
    return out;
}

inline std::vector<RunResult> monte_carlo_cv(const ExperimentConfig& cfg) {
    std::vector<NamedDataset> datasets;
    for (const auto& path : cfg.datasets)
        datasets.push_back({std::filesystem::path(path).stem().string(), load_dataset(path)});
    if (datasets.empty()) throw ConfigError("no datasets configured");
    return monte_carlo_cv(cfg, datasets);
}

}  // namespace qens
