#include "natforest/search.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>
#include <unordered_map>

#include "natforest/archive.hpp"
#include "natforest/csv.hpp"
#include "natforest/rng.hpp"

namespace natforest {

namespace {

// Canonical 8-entry list order from the per-action combination lists:
// position -> mask over (a_In = bit 0, a_Out = bit 1, de_In = bit 2).
constexpr uint8_t kListMask[8] = {0b000, 0b010, 0b110, 0b100, 0b001, 0b101, 0b011, 0b111};

// First quantitative index of each action triplet (a_In, a_Out, de_In).
constexpr int kTripletBase[4] = {9, 12, 15, 18};

constexpr uint64_t kCvFoldTag = 0x6376666f6c647331ULL; // stream tag for fold assignment
constexpr uint64_t kFinalFitTag = 0;

void append_triplet(std::vector<int>& cols, int base, uint8_t set, bool selected) {
    const uint8_t mask = kListMask[set];
    for (int bit = 0; bit < 3; ++bit) {
        const bool in_mask = (mask >> bit) & 1;
        if (in_mask == selected) cols.push_back(base + bit);
    }
}

} // namespace

std::vector<int> FeatureCombo::selected_columns() const {
    std::vector<int> cols;
    if (include_profile) {
        for (int i = 0; i < 4; ++i) cols.push_back(i);
    }
    if (include_public) {
        for (int i = 4; i < 9; ++i) cols.push_back(i);
    }
    const uint8_t sets[4] = {mention_set, retweet_set, reply_set, quote_set};
    for (int a = 0; a < 4; ++a) append_triplet(cols, kTripletBase[a], sets[a], true);
    if (include_activity) cols.push_back(21);
    std::sort(cols.begin(), cols.end());
    return cols;
}

std::vector<int> FeatureCombo::removed_columns() const {
    std::vector<int> cols;
    if (!include_profile) {
        for (int i = 0; i < 4; ++i) cols.push_back(i);
    }
    if (!include_public) {
        for (int i = 4; i < 9; ++i) cols.push_back(i);
    }
    const uint8_t sets[4] = {mention_set, retweet_set, reply_set, quote_set};
    for (int a = 0; a < 4; ++a) append_triplet(cols, kTripletBase[a], sets[a], false);
    if (!include_activity) cols.push_back(21);
    std::sort(cols.begin(), cols.end());
    return cols;
}

bool FeatureCombo::degenerate() const {
    return mention_set == 0 && retweet_set == 0 && reply_set == 0 && quote_set == 0 &&
           !include_profile && !include_public && !include_activity;
}

std::vector<Cell> enumerate_combos() {
    std::vector<Cell> cells;
    cells.reserve(kTotalCells);
    uint32_t num = 0;
    for (Criterion crit : {Criterion::gini, Criterion::entropy}) {
        for (ClassWeight cw :
             {ClassWeight::none, ClassWeight::balanced, ClassWeight::balanced_subsample}) {
            uint32_t combo_index = 0;
            for (int m = 0; m < kActionListLength; ++m) {
                for (int rt = 0; rt < kActionListLength; ++rt) {
                    for (int rp = 0; rp < kActionListLength; ++rp) {
                        for (int rq = 0; rq < kActionListLength; ++rq) {
                            for (int profile = 0; profile < 2; ++profile) {
                                for (int pub = 0; pub < 2; ++pub) {
                                    for (int act = 0; act < 2; ++act) {
                                        Cell cell;
                                        cell.combo.mention_set = static_cast<uint8_t>(m);
                                        cell.combo.retweet_set = static_cast<uint8_t>(rt);
                                        cell.combo.reply_set = static_cast<uint8_t>(rp);
                                        cell.combo.quote_set = static_cast<uint8_t>(rq);
                                        cell.combo.include_profile = profile != 0;
                                        cell.combo.include_public = pub != 0;
                                        cell.combo.include_activity = act != 0;
                                        cell.combo.index = combo_index++;
                                        cell.criterion = crit;
                                        cell.class_weight = cw;
                                        cell.num = ++num;
                                        cells.push_back(cell);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return cells;
}

std::optional<double> precision(int tp, int fp) {
    if (tp + fp == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

LabeledSample join_labels(const std::vector<UserFeatureRow>& rows,
                          const std::vector<std::pair<UserId, int>>& labels) {
    std::unordered_map<UserId, int> by_id;
    for (const auto& [id, label] : labels) by_id[id] = label;

    LabeledSample sample;
    sample.columns.assign(kNumQuantitative, {});
    for (const auto& row : rows) {
        auto it = by_id.find(row.author_id);
        if (it == by_id.end()) continue;
        sample.author_ids.push_back(row.author_id);
        sample.labels.push_back(it->second);
        for (size_t c = 0; c < kNumQuantitative; ++c) {
            sample.columns[c].push_back(static_cast<double>(row.quantitative(c)));
        }
        by_id.erase(it);
    }
    if (!by_id.empty()) {
        throw DataError("join_labels: " + std::to_string(by_id.size()) +
                        " labeled author_ids missing from the features file");
    }
    return sample;
}

TrainTestSplit split_train_test(size_t n, double ratio, uint64_t seed) {
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    const size_t n_train = static_cast<size_t>(std::llround(ratio * static_cast<double>(n)));
    TrainTestSplit split;
    split.train.assign(order.begin(), order.begin() + static_cast<long>(n_train));
    split.test.assign(order.begin() + static_cast<long>(n_train), order.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

SearchContext make_search_context(const LabeledSample& sample, uint64_t base_seed,
                                  double ratio) {
    SearchContext ctx;
    ctx.sample = &sample;
    ctx.base_seed = base_seed;
    ctx.split = split_train_test(sample.size(), ratio, derive_seed(base_seed, 0x53504c4954ULL));

    // Stratified fold assignment: shuffle each class, deal round-robin.
    Rng rng(derive_seed(base_seed, kCvFoldTag));
    std::vector<size_t> by_class[2];
    for (size_t i : ctx.split.train) by_class[sample.labels[i] == 1 ? 1 : 0].push_back(i);
    ctx.cv_folds.assign(static_cast<size_t>(ctx.cv_k), {});
    for (auto& cls : by_class) {
        rng.shuffle(cls);
        for (size_t i = 0; i < cls.size(); ++i) {
            ctx.cv_folds[i % static_cast<size_t>(ctx.cv_k)].push_back(cls[i]);
        }
    }
    for (auto& fold : ctx.cv_folds) std::sort(fold.begin(), fold.end());
    return ctx;
}

namespace {

Dataset project(const LabeledSample& sample, const std::vector<int>& cols,
                const std::vector<size_t>& rows) {
    Dataset ds;
    ds.columns.reserve(cols.size());
    ds.feature_names.reserve(cols.size());
    for (int c : cols) {
        const auto& src = sample.columns[static_cast<size_t>(c)];
        std::vector<double> col;
        col.reserve(rows.size());
        for (size_t r : rows) col.push_back(src[r]);
        ds.columns.push_back(std::move(col));
        ds.feature_names.emplace_back(kQuantitativeColumns[static_cast<size_t>(c)]);
    }
    ds.labels.reserve(rows.size());
    for (size_t r : rows) ds.labels.push_back(sample.labels[r]);
    return ds;
}

std::vector<double> row_values(const LabeledSample& sample, const std::vector<int>& cols,
                               size_t row) {
    std::vector<double> v;
    v.reserve(cols.size());
    for (int c : cols) v.push_back(sample.columns[static_cast<size_t>(c)][row]);
    return v;
}

} // namespace

SearchRow evaluate_cell(const SearchContext& ctx, const Cell& cell) {
    SearchRow out;
    out.num = cell.num;
    out.criterion = cell.criterion;
    out.class_weight = cell.class_weight;
    out.removed_cols = cell.combo.removed_columns();
    if (cell.combo.degenerate()) {
        out.degenerate = true;
        return out;
    }

    const LabeledSample& sample = *ctx.sample;
    const std::vector<int> cols = cell.combo.selected_columns();
    const uint64_t cell_seed = derive_seed(ctx.base_seed, cell.num);

    ForestConfig cfg;
    cfg.n_estimators = out.n_estimators;
    cfg.criterion = cell.criterion;
    cfg.class_weight = cell.class_weight;

    // Cross-validated accuracy on the training part.
    double score_sum = 0.0;
    int scored_folds = 0;
    std::vector<size_t> fold_train;
    for (size_t f = 0; f < ctx.cv_folds.size(); ++f) {
        const auto& holdout = ctx.cv_folds[f];
        if (holdout.empty()) continue;
        fold_train.clear();
        for (size_t g = 0; g < ctx.cv_folds.size(); ++g) {
            if (g == f) continue;
            fold_train.insert(fold_train.end(), ctx.cv_folds[g].begin(), ctx.cv_folds[g].end());
        }
        if (fold_train.empty()) continue;
        std::sort(fold_train.begin(), fold_train.end());
        cfg.seed = derive_seed(cell_seed, 100 + f);
        const TrainedForest forest = fit(project(sample, cols, fold_train), cfg);
        size_t correct = 0;
        for (size_t r : holdout) {
            if (forest.predict(row_values(sample, cols, r)) == sample.labels[r]) ++correct;
        }
        score_sum += static_cast<double>(correct) / static_cast<double>(holdout.size());
        ++scored_folds;
    }
    out.cv_score = scored_folds > 0 ? score_sum / scored_folds : 0.0;

    // Refit on the full training part, evaluate on the held-out test part.
    cfg.seed = derive_seed(cell_seed, kFinalFitTag);
    const TrainedForest forest = fit(project(sample, cols, ctx.split.train), cfg);
    for (size_t r : ctx.split.test) {
        const int pred = forest.predict(row_values(sample, cols, r));
        const int truth = sample.labels[r];
        if (pred == 1 && truth == 1) ++out.tp;
        else if (pred == 1 && truth == 0) ++out.fp;
        else if (pred == 0 && truth == 1) ++out.fn;
        else ++out.tn;
    }
    return out;
}

std::vector<SearchRow> run_search(const LabeledSample& sample, const SearchOptions& options) {
    bool has0 = false, has1 = false;
    for (int l : sample.labels) (l == 1 ? has1 : has0) = true;
    if (!has0 || !has1) {
        throw DataError("run_search: the labeled sample must contain both classes (got " +
                        std::to_string(sample.size()) + " rows of a single class)");
    }
    if (options.stride == 0) throw std::invalid_argument("run_search: stride must be >= 1");

    const SearchContext ctx = make_search_context(sample, options.base_seed);
    const std::vector<Cell> all_cells = enumerate_combos();
    std::vector<const Cell*> work;
    work.reserve(all_cells.size() / options.stride + 1);
    for (const Cell& c : all_cells) {
        if ((c.num - 1) % options.stride == 0) work.push_back(&c);
    }

    std::vector<SearchRow> results(work.size());
    std::atomic<size_t> next{0};
    std::atomic<size_t> done{0};

    const int n_workers = std::max(1, options.workers);
    auto run_worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= work.size()) break;
            results[i] = evaluate_cell(ctx, *work[i]);
            done.fetch_add(1);
        }
    };

    if (n_workers == 1 && !options.progress) {
        run_worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(run_worker);
        if (options.progress) {
            size_t last = 0;
            while (last < work.size()) {
                const size_t d = done.load();
                if (d != last) {
                    last = d;
                    options.progress(d, work.size());
                }
                if (d >= work.size()) break;
                std::this_thread::sleep_for(std::chrono::milliseconds(50));
            }
        }
        for (auto& t : pool) t.join();
        if (options.progress) options.progress(work.size(), work.size());
    }
    return results;
}

// --- results.csv --------------------------------------------------------------

namespace {

const std::vector<std::string> kResultColumns = {
    "num", "TN", "FP", "FN", "TP", "removed_cols", "criterion", "class_weight",
    "n_estimators", "cv_score", "degenerate",
};

std::string removed_names(const std::vector<int>& cols) {
    std::vector<std::string> names;
    names.reserve(cols.size());
    for (int c : cols) names.emplace_back(kQuantitativeColumns[static_cast<size_t>(c)]);
    return join_semicolons(names);
}

bool parse_int(const std::string& s, int& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

} // namespace

void write_results_csv(const std::string& path, const std::vector<SearchRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path + ": cannot create");
    csv_write_row(out, kResultColumns);
    char cv_buf[32];
    for (const auto& r : rows) {
        std::snprintf(cv_buf, sizeof(cv_buf), "%.6f", r.cv_score);
        if (r.degenerate) {
            csv_write_row(out, {std::to_string(r.num), "", "", "", "", removed_names(r.removed_cols),
                                to_string(r.criterion), to_string(r.class_weight),
                                std::to_string(r.n_estimators), "", "1"});
        } else {
            csv_write_row(out, {std::to_string(r.num), std::to_string(r.tn), std::to_string(r.fp),
                                std::to_string(r.fn), std::to_string(r.tp),
                                removed_names(r.removed_cols), to_string(r.criterion),
                                to_string(r.class_weight), std::to_string(r.n_estimators), cv_buf,
                                "0"});
        }
    }
    if (!out) throw DataError(path + ": write failed");
}

std::vector<SearchRow> read_results_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path + ": cannot open");
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields) || fields != kResultColumns) {
        throw DataError(path + ": bad or missing results header");
    }
    std::vector<SearchRow> rows;
    while (reader.next(fields)) {
        if (fields.size() != kResultColumns.size()) {
            throw DataError(path + ": bad row at line " + std::to_string(reader.line()));
        }
        SearchRow r;
        unsigned long num = std::stoul(fields[0]);
        r.num = static_cast<uint32_t>(num);
        r.degenerate = fields[10] == "1";
        if (!r.degenerate) {
            if (!parse_int(fields[1], r.tn) || !parse_int(fields[2], r.fp) ||
                !parse_int(fields[3], r.fn) || !parse_int(fields[4], r.tp)) {
                throw DataError(path + ": bad confusion counts at line " +
                                std::to_string(reader.line()));
            }
            r.cv_score = std::stod(fields[9]);
        }
        for (const auto& name : split_semicolons(fields[5])) {
            const int idx = quantitative_column_index(name);
            if (idx < 0) throw DataError(path + ": unknown column " + name);
            r.removed_cols.push_back(idx);
        }
        auto crit = criterion_from_string(fields[6]);
        auto cw = class_weight_from_string(fields[7]);
        if (!crit || !cw || !parse_int(fields[8], r.n_estimators)) {
            throw DataError(path + ": bad parameters at line " + std::to_string(reader.line()));
        }
        r.criterion = *crit;
        r.class_weight = *cw;
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<SearchRow> select_model(const std::vector<SearchRow>& rows, int fp_max,
                                    size_t top_k) {
    std::vector<SearchRow> picked;
    for (const auto& r : rows) {
        if (!r.degenerate && r.fp <= fp_max) picked.push_back(r);
    }
    std::sort(picked.begin(), picked.end(), [](const SearchRow& a, const SearchRow& b) {
        if (a.fp != b.fp) return a.fp < b.fp;
        if (a.tp != b.tp) return a.tp > b.tp;
        if (a.selected_count() != b.selected_count()) return a.selected_count() < b.selected_count();
        return a.num < b.num;
    });
    if (picked.size() > top_k) picked.resize(top_k);
    return picked;
}

} // namespace natforest
