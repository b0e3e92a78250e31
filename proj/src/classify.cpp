#include "natforest/classify.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "natforest/archive.hpp"
#include "natforest/csv.hpp"
#include "natforest/rng.hpp"

namespace natforest {

ChampionSpec champion_from_row(const SearchRow& row, uint64_t seed) {
    ChampionSpec champion;
    std::vector<bool> removed(kNumQuantitative, false);
    for (int c : row.removed_cols) removed[static_cast<size_t>(c)] = true;
    for (size_t i = 0; i < kNumQuantitative; ++i) {
        if (!removed[i]) champion.columns.emplace_back(kQuantitativeColumns[i]);
    }
    champion.criterion = row.criterion;
    champion.class_weight = row.class_weight;
    champion.n_estimators = row.n_estimators;
    champion.seed = seed;
    champion.provenance_num = row.num;
    return champion;
}

void write_champion(const std::string& path, const ChampionSpec& champion) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path + ": cannot create");
    std::vector<std::string> cols = champion.columns;
    out << "columns=" << join_semicolons(cols) << "\n";
    out << "criterion=" << to_string(champion.criterion) << "\n";
    out << "class_weight=" << to_string(champion.class_weight) << "\n";
    out << "n_estimators=" << champion.n_estimators << "\n";
    out << "seed=" << champion.seed << "\n";
    out << "provenance=" << champion.provenance_num << "\n";
}

ChampionSpec read_champion(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path + ": cannot open");
    ChampionSpec champion;
    bool saw_columns = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError(path + ": expected key=value, got " + line);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "columns") {
            champion.columns = split_semicolons(value);
            saw_columns = true;
        } else if (key == "criterion") {
            auto c = criterion_from_string(value);
            if (!c) throw DataError(path + ": bad criterion " + value);
            champion.criterion = *c;
        } else if (key == "class_weight") {
            auto w = class_weight_from_string(value);
            if (!w) throw DataError(path + ": bad class_weight " + value);
            champion.class_weight = *w;
        } else if (key == "n_estimators") {
            champion.n_estimators = std::stoi(value);
        } else if (key == "seed") {
            champion.seed = std::stoull(value);
        } else if (key == "provenance") {
            champion.provenance_num = std::stoull(value);
        } else {
            throw DataError(path + ": unknown key " + key);
        }
    }
    if (!saw_columns || champion.columns.empty()) {
        throw DataError(path + ": champion has no columns");
    }
    return champion;
}

namespace {

std::vector<int> resolve_columns(const ChampionSpec& champion) {
    std::vector<int> cols;
    std::string missing;
    for (const auto& name : champion.columns) {
        const int idx = quantitative_column_index(name);
        if (idx < 0) {
            if (!missing.empty()) missing += ", ";
            missing += name;
        } else {
            cols.push_back(idx);
        }
    }
    if (!missing.empty()) {
        throw DataError("champion columns not present in features: " + missing);
    }
    return cols;
}

} // namespace

TrainedForest train_final(const std::vector<UserFeatureRow>& rows,
                          const std::vector<std::pair<UserId, int>>& labels,
                          const ChampionSpec& champion, bool train_split_only) {
    const std::vector<int> cols = resolve_columns(champion);
    const LabeledSample sample = join_labels(rows, labels);
    if (sample.size() == 0) throw DataError("train_final: no labeled rows");

    std::vector<size_t> fit_rows;
    if (train_split_only) {
        fit_rows = split_train_test(sample.size(), 0.8,
                                    derive_seed(champion.seed, 0x53504c4954ULL))
                       .train;
    } else {
        fit_rows.resize(sample.size());
        for (size_t i = 0; i < fit_rows.size(); ++i) fit_rows[i] = i;
    }

    Dataset ds;
    ds.columns.reserve(cols.size());
    for (int c : cols) {
        std::vector<double> col;
        col.reserve(fit_rows.size());
        for (size_t r : fit_rows) col.push_back(sample.columns[static_cast<size_t>(c)][r]);
        ds.columns.push_back(std::move(col));
        ds.feature_names.emplace_back(kQuantitativeColumns[static_cast<size_t>(c)]);
    }
    for (size_t r : fit_rows) ds.labels.push_back(sample.labels[r]);

    bool has0 = false, has1 = false;
    for (int l : ds.labels) (l == 1 ? has1 : has0) = true;
    if (!has0 || !has1) throw DataError("train_final: sample must contain both classes");

    ForestConfig cfg;
    cfg.n_estimators = champion.n_estimators;
    cfg.criterion = champion.criterion;
    cfg.class_weight = champion.class_weight;
    cfg.seed = champion.seed;
    return fit(ds, cfg);
}

void classify_population(const TrainedForest& forest, std::vector<UserFeatureRow>& rows,
                         int workers) {
    std::vector<int> cols;
    cols.reserve(forest.feature_names.size());
    std::string missing;
    for (const auto& name : forest.feature_names) {
        const int idx = quantitative_column_index(name);
        if (idx < 0) {
            if (!missing.empty()) missing += ", ";
            missing += name;
        } else {
            cols.push_back(idx);
        }
    }
    if (!missing.empty()) throw DataError("model columns not present in features: " + missing);

    auto classify_range = [&](size_t begin, size_t end) {
        std::vector<double> values(cols.size());
        for (size_t i = begin; i < end; ++i) {
            auto& row = rows[i];
            for (size_t c = 0; c < cols.size(); ++c) {
                values[c] = static_cast<double>(row.quantitative(static_cast<size_t>(cols[c])));
            }
            const auto [p0, p1] = forest.predict_proba(values);
            row.prob0 = p0;
            row.prob1 = p1;
            row.pred = p1 > 0.5 ? 1 : 0;
        }
    };

    const int n_workers = std::max(1, workers);
    if (n_workers == 1 || rows.size() < 2048) {
        classify_range(0, rows.size());
        return;
    }
    std::vector<std::thread> pool;
    const size_t chunk = (rows.size() + static_cast<size_t>(n_workers) - 1) /
                         static_cast<size_t>(n_workers);
    for (int w = 0; w < n_workers; ++w) {
        const size_t begin = static_cast<size_t>(w) * chunk;
        const size_t end = std::min(rows.size(), begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(classify_range, begin, end);
    }
    for (auto& t : pool) t.join();
}

std::vector<UserFeatureRow> extract_class1(const std::vector<UserFeatureRow>& rows) {
    std::vector<UserFeatureRow> out;
    for (const auto& r : rows) {
        if (r.pred && *r.pred == 1) out.push_back(r);
    }
    return out;
}

FollowerDiagnostic follower_diagnostic(const std::vector<UserFeatureRow>& rows) {
    FollowerDiagnostic diag;
    if (rows.empty()) return diag;
    std::vector<const UserFeatureRow*> by_followers;
    by_followers.reserve(rows.size());
    for (const auto& r : rows) by_followers.push_back(&r);
    std::sort(by_followers.begin(), by_followers.end(),
              [](const UserFeatureRow* a, const UserFeatureRow* b) {
                  return a->followers > b->followers;
              });
    diag.top_decile_size = std::max<size_t>(1, rows.size() / 10);
    diag.follower_floor = by_followers[diag.top_decile_size - 1]->followers;
    for (size_t i = 0; i < diag.top_decile_size; ++i) {
        if (by_followers[i]->pred && *by_followers[i]->pred == 1) ++diag.top_decile_class1;
    }
    return diag;
}

EvalReport build_report(const std::vector<DatasetCount>& before,
                        const std::vector<DatasetCount>& after) {
    if (before.size() != after.size()) {
        throw DataError("build_report: before/after dataset counts differ");
    }
    for (size_t i = 0; i < before.size(); ++i) {
        if (before[i].name != after[i].name) {
            throw DataError("build_report: dataset name mismatch: " + before[i].name +
                            " vs " + after[i].name);
        }
    }
    auto to_rows = [](const std::vector<DatasetCount>& counts, double& mean) {
        std::vector<EvalReportRow> rows;
        double sum = 0.0;
        for (const auto& c : counts) {
            if (c.sample_size <= 0 || c.successes < 0 || c.successes > c.sample_size) {
                throw DataError("build_report: bad counts for " + c.name);
            }
            EvalReportRow row;
            row.name = c.name;
            row.population = c.population;
            row.sample_size = c.sample_size;
            row.class1 = c.successes;
            row.class0 = c.sample_size - c.successes;
            row.percent = 100.0 * static_cast<double>(c.successes) /
                          static_cast<double>(c.sample_size);
            sum += row.percent;
            rows.push_back(std::move(row));
        }
        mean = counts.empty() ? 0.0 : sum / static_cast<double>(counts.size());
        return rows;
    };
    EvalReport report;
    report.before = to_rows(before, report.before_mean);
    report.after = to_rows(after, report.after_mean);
    report.delta = report.after_mean - report.before_mean;
    return report;
}

std::string format_report(const EvalReport& report) {
    std::ostringstream out;
    char buf[192];
    auto print_block = [&](const char* title, const std::vector<EvalReportRow>& rows,
                           double mean) {
        out << title << "\n";
        out << "  name             users    sample   class1   class0   %class1\n";
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof(buf), "  %-15s %8lld %8lld %8lld %8lld   %6.2f%%\n",
                          r.name.c_str(), static_cast<long long>(r.population),
                          static_cast<long long>(r.sample_size), static_cast<long long>(r.class1),
                          static_cast<long long>(r.class0), r.percent);
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), "  mean %%class1: %.2f%%\n", mean);
        out << buf;
    };
    print_block("initial samples", report.before, report.before_mean);
    print_block("class-1 samples", report.after, report.after_mean);
    std::snprintf(buf, sizeof(buf), "delta: %.2f percentage points\n", report.delta);
    out << buf;
    return out.str();
}

} // namespace natforest
