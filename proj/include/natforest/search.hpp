#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "natforest/forest.hpp"
#include "natforest/records.hpp"

namespace natforest {

// One way of picking columns: an 8-way choice per interaction (which of the
// a_In / a_Out / de_In triplet to keep, enumerated in the canonical 8-entry
// list order), plus all-or-nothing blocks for the profile metrics, the
// public-metric sums, and activity.
struct FeatureCombo {
    uint8_t mention_set = 0; // 0..7, canonical list position
    uint8_t retweet_set = 0;
    uint8_t reply_set = 0;
    uint8_t quote_set = 0;
    bool include_profile = false;
    bool include_public = false;
    bool include_activity = false;
    uint32_t index = 0; // 0-based ordinal of the feature set (0..32767)

    // Indices into kQuantitativeColumns, ascending.
    std::vector<int> selected_columns() const;
    std::vector<int> removed_columns() const;
    bool degenerate() const;
};

// The number of subsets each interaction list enumerates.
inline constexpr int kActionListLength = 8;
inline constexpr uint32_t kFeatureSetCount = 32768;  // 8^4 * 2^3
inline constexpr uint32_t kTotalCells = 196608;      // feature sets * 2 criteria * 3 weights
inline constexpr uint32_t kDegenerateCells = 6;

struct Cell {
    FeatureCombo combo;
    Criterion criterion = Criterion::gini;
    ClassWeight class_weight = ClassWeight::none;
    uint32_t num = 0; // 1-based canonical ordinal
};

// Full Cartesian product in canonical order: criterion, then class weight,
// then the 32,768 feature sets.
std::vector<Cell> enumerate_combos();

struct SearchRow {
    uint32_t num = 0;
    int tn = 0, fp = 0, fn = 0, tp = 0;
    std::vector<int> removed_cols; // canonical quantitative indices
    Criterion criterion = Criterion::gini;
    ClassWeight class_weight = ClassWeight::none;
    int n_estimators = 10;
    double cv_score = 0.0;
    bool degenerate = false;

    int selected_count() const { return static_cast<int>(kNumQuantitative) -
                                        static_cast<int>(removed_cols.size()); }
};

// TP / (TP + FP); empty when no positives were predicted.
std::optional<double> precision(int tp, int fp);

// The labeled sample the search runs on: 22 columns, binary labels.
struct LabeledSample {
    std::vector<UserId> author_ids;
    std::vector<std::vector<double>> columns; // [22][n]
    std::vector<int> labels;

    size_t size() const { return labels.size(); }
};

// Joins features rows with (author_id, label) pairs; rows without a label are
// dropped. Throws DataError when a labeled id is missing from the features.
LabeledSample join_labels(const std::vector<UserFeatureRow>& rows,
                          const std::vector<std::pair<UserId, int>>& labels);

struct TrainTestSplit {
    std::vector<size_t> train;
    std::vector<size_t> test;
};

// Seeded shuffle then split; |train| = round(ratio * n).
TrainTestSplit split_train_test(size_t n, double ratio, uint64_t seed);

// Everything evaluate_cell needs that is fixed for a whole run: the sample,
// the single train/test split, and the stratified CV folds.
struct SearchContext {
    const LabeledSample* sample = nullptr;
    TrainTestSplit split;
    std::vector<std::vector<size_t>> cv_folds; // indices into the sample
    uint64_t base_seed = 123;
    int cv_k = 5;
};

SearchContext make_search_context(const LabeledSample& sample, uint64_t base_seed,
                                  double ratio = 0.8);

// Trains the cell's configuration (5-fold CV score on the training part, then
// a refit on the full training part) and fills the confusion matrix from the
// test part at threshold > 0.5.
SearchRow evaluate_cell(const SearchContext& ctx, const Cell& cell);

struct SearchOptions {
    uint64_t base_seed = 123;
    int workers = 1;
    // Evaluate only cells with (num - 1) % stride == 0; 1 = the full grid.
    uint32_t stride = 1;
    std::function<void(size_t done, size_t total)> progress;
};

// Evaluates every cell (per-cell derived seeds, canonical output order).
// The result is independent of worker count. Throws DataError when the
// sample does not contain both classes.
std::vector<SearchRow> run_search(const LabeledSample& sample, const SearchOptions& options);

void write_results_csv(const std::string& path, const std::vector<SearchRow>& rows);
std::vector<SearchRow> read_results_csv(const std::string& path);

// Filter FP <= fp_max, order by (FP asc, TP desc, fewer selected columns,
// lower num), return the first top_k.
std::vector<SearchRow> select_model(const std::vector<SearchRow>& rows, int fp_max,
                                    size_t top_k);

} // namespace natforest
