// Result aggregation and emission. A CSV table holds one `detail` row per
// (dataset, normalization, kind, d, run) and one `summary` row per
// configuration; the JSON document holds the same two lists. Doubles are
// written with 17 significant digits so that parsing reproduces them exactly.

#pragma once

#include <qens/dataset_io.hpp>
#include <qens/errors.hpp>
#include <qens/experiment.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace qens {

struct Stat {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation over runs
};

struct SummaryRow {
    std::string dataset;
    NormalizationKind normalization = NormalizationKind::none;
    ClassifierKind kind = ClassifierKind::distance;
    int d = 0;
    ExecutionMode mode = ExecutionMode::exact;
    int runs = 0;
    Stat acc_single, acc_internal_mean, acc_ensemble, selection_success, elapsed_ms;
};

namespace detail {

inline Stat stat_of(const std::vector<double>& v) {
    Stat s;
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    for (double x : v) s.std += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(s.std / static_cast<double>(v.size()));
    return s;
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double to_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    if (!parse_double(s, v)) throw IngestionError("results: bad number in '" + what + "': '" + s + "'");
    return v;
}

}  // namespace detail

// Grouped by configuration in first-seen order.
inline std::vector<SummaryRow> summarize(const std::vector<RunResult>& results) {
    using Key = std::tuple<std::string, NormalizationKind, ClassifierKind, int, ExecutionMode>;
    std::map<Key, std::vector<const RunResult*>> groups;
    std::vector<Key> order;
    for (const auto& r : results) {
        Key key{r.dataset, r.normalization, r.kind, r.d, r.mode};
        auto [it, fresh] = groups.try_emplace(key);
        if (fresh) order.push_back(key);
        it->second.push_back(&r);
    }
    std::vector<SummaryRow> out;
    for (const auto& key : order) {
        const auto& rows = groups[key];
        SummaryRow s;
        std::tie(s.dataset, s.normalization, s.kind, s.d, s.mode) = key;
        s.runs = static_cast<int>(rows.size());
        auto collect = [&](auto get) {
            std::vector<double> v;
            for (const auto* r : rows) v.push_back(get(*r));
            return detail::stat_of(v);
        };
        s.acc_single = collect([](const RunResult& r) { return r.acc_single; });
        s.acc_internal_mean = collect([](const RunResult& r) { return r.acc_internal_mean(); });
        s.acc_ensemble = collect([](const RunResult& r) { return r.acc_ensemble; });
        s.selection_success = collect([](const RunResult& r) { return r.selection_success; });
        s.elapsed_ms = collect([](const RunResult& r) { return r.elapsed_ms; });
        out.push_back(std::move(s));
    }
    return out;
}

inline constexpr const char* kCsvHeader =
    "row_type,dataset,normalization,kind,d,mode,run,seed,runs,"
    "acc_single,acc_single_std,acc_internal_mean,acc_internal_mean_std,acc_ensemble,acc_ensemble_std,"
    "selection_success,selection_success_std,elapsed_ms,elapsed_ms_std,acc_internal";

inline void write_csv(std::ostream& out, const std::vector<RunResult>& results) {
    using detail::fmt;
    out << kCsvHeader << '\n';
    for (const auto& r : results) {
        std::string internal;
        for (std::size_t c = 0; c < r.acc_internal.size(); ++c) internal += (c ? ";" : "") + fmt(r.acc_internal[c]);
        out << "detail," << r.dataset << ',' << to_string(r.normalization) << ',' << to_string(r.kind) << ',' << r.d
            << ',' << to_string(r.mode) << ',' << r.run << ',' << r.seed << ",," << fmt(r.acc_single) << ",,"
            << fmt(r.acc_internal_mean()) << ",," << fmt(r.acc_ensemble) << ",," << fmt(r.selection_success) << ",,"
            << fmt(r.elapsed_ms) << ",," << internal << '\n';
    }
    for (const auto& s : summarize(results)) {
        out << "summary," << s.dataset << ',' << to_string(s.normalization) << ',' << to_string(s.kind) << ',' << s.d
            << ',' << to_string(s.mode) << ",,," << s.runs;
        for (const Stat* st : {&s.acc_single, &s.acc_internal_mean, &s.acc_ensemble, &s.selection_success,
                               &s.elapsed_ms})
            out << ',' << fmt(st->mean) << ',' << fmt(st->std);
        out << ",\n";
    }
}

inline nlohmann::json to_json(const std::vector<RunResult>& results) {
    nlohmann::json doc;
    doc["detail"] = nlohmann::json::array();
    for (const auto& r : results) {
        doc["detail"].push_back({{"dataset", r.dataset},
                                 {"normalization", to_string(r.normalization)},
                                 {"kind", to_string(r.kind)},
                                 {"d", r.d},
                                 {"mode", to_string(r.mode)},
                                 {"run", r.run},
                                 {"seed", r.seed},
                                 {"acc_single", r.acc_single},
                                 {"acc_internal", r.acc_internal},
                                 {"acc_ensemble", r.acc_ensemble},
                                 {"selection_success", r.selection_success},
                                 {"elapsed_ms", r.elapsed_ms}});
    }
    doc["summary"] = nlohmann::json::array();
    auto stat = [](const Stat& s) { return nlohmann::json{{"mean", s.mean}, {"std", s.std}}; };
    for (const auto& s : summarize(results)) {
        doc["summary"].push_back({{"dataset", s.dataset},
                                  {"normalization", to_string(s.normalization)},
                                  {"kind", to_string(s.kind)},
                                  {"d", s.d},
                                  {"mode", to_string(s.mode)},
                                  {"runs", s.runs},
                                  {"acc_single", stat(s.acc_single)},
                                  {"acc_internal_mean", stat(s.acc_internal_mean)},
                                  {"acc_ensemble", stat(s.acc_ensemble)},
                                  {"selection_success", stat(s.selection_success)},
                                  {"elapsed_ms", stat(s.elapsed_ms)}});
    }
    return doc;
}

inline void write_json(std::ostream& out, const std::vector<RunResult>& results) {
    out << to_json(results).dump(2) << '\n';
}

inline void emit_results(const std::vector<RunResult>& results, const std::string& path, const std::string& format) {
    if (results.empty()) throw UsageError("no results to emit");
    if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
    std::ofstream out(path);
    if (!out) throw Error(ErrorCategory::usage, path + ": cannot open for writing");
    if (format == "csv") write_csv(out, results);
    else write_json(out, results);
    out.flush();
    if (!out) throw Error(ErrorCategory::usage, path + ": write failed");
}

struct ParsedResults {
    std::vector<RunResult> detail;
    std::vector<SummaryRow> summary;
};

inline ParsedResults parse_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != kCsvHeader) throw IngestionError("results: unexpected header");
    ParsedResults out;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto c = detail::split_csv_line(line);
        if (c.size() != 20) throw IngestionError("results: expected 20 cells, found " + std::to_string(c.size()));
        auto num = [&](std::size_t k) { return detail::to_double(c[k], c[0]); };
        if (c[0] == "detail") {
            RunResult r;
            r.dataset = c[1];
            r.normalization = parse_normalization(c[2]);
            r.kind = parse_kind(c[3]);
            r.d = std::stoi(c[4]);
            r.mode = parse_mode(c[5]);
            r.run = std::stoi(c[6]);
            r.seed = std::stoull(c[7]);
            r.acc_single = num(9);
            r.acc_ensemble = num(13);
            r.selection_success = num(15);
            r.elapsed_ms = num(17);
            std::istringstream list(c[19]);
            std::string item;
            while (std::getline(list, item, ';')) r.acc_internal.push_back(detail::to_double(item, "acc_internal"));
            out.detail.push_back(std::move(r));
        } else if (c[0] == "summary") {
            SummaryRow s;
            s.dataset = c[1];
            s.normalization = parse_normalization(c[2]);
            s.kind = parse_kind(c[3]);
            s.d = std::stoi(c[4]);
            s.mode = parse_mode(c[5]);
            s.runs = std::stoi(c[8]);
            Stat* stats[] = {&s.acc_single, &s.acc_internal_mean, &s.acc_ensemble, &s.selection_success, &s.elapsed_ms};
            for (std::size_t k = 0; k < 5; ++k) *stats[k] = {num(9 + 2 * k), num(10 + 2 * k)};
            out.summary.push_back(std::move(s));
        } else {
            throw IngestionError("results: unknown row type '" + c[0] + "'");
        }
    }
    return out;
}

inline ParsedResults parse_results_json(const nlohmann::json& doc) {
    ParsedResults out;
    for (const auto& j : doc.at("detail")) {
        RunResult r;
        r.dataset = j.at("dataset").get<std::string>();
        r.normalization = parse_normalization(j.at("normalization").get<std::string>());
        r.kind = parse_kind(j.at("kind").get<std::string>());
        r.d = j.at("d").get<int>();
        r.mode = parse_mode(j.at("mode").get<std::string>());
        r.run = j.at("run").get<int>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.acc_single = j.at("acc_single").get<double>();
        r.acc_internal = j.at("acc_internal").get<std::vector<double>>();
        r.acc_ensemble = j.at("acc_ensemble").get<double>();
        r.selection_success = j.at("selection_success").get<double>();
        r.elapsed_ms = j.at("elapsed_ms").get<double>();
        out.detail.push_back(std::move(r));
    }
    auto stat = [](const nlohmann::json& j) { return Stat{j.at("mean").get<double>(), j.at("std").get<double>()}; };
    for (const auto& j : doc.at("summary")) {
        SummaryRow s;
        s.dataset = j.at("dataset").get<std::string>();
        s.normalization = parse_normalization(j.at("normalization").get<std::string>());
        s.kind = parse_kind(j.at("kind").get<std::string>());
        s.d = j.at("d").get<int>();
        s.mode = parse_mode(j.at("mode").get<std::string>());
        s.runs = j.at("runs").get<int>();
        s.acc_single = stat(j.at("acc_single"));
        s.acc_internal_mean = stat(j.at("acc_internal_mean"));
        s.acc_ensemble = stat(j.at("acc_ensemble"));
        s.selection_success = stat(j.at("selection_success"));
        s.elapsed_ms = stat(j.at("elapsed_ms"));
        out.summary.push_back(std::move(s));
    }
    return out;
}

}  // namespace qens
