#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "natforest/forest.hpp"
#include "natforest/records.hpp"
#include "natforest/search.hpp"

namespace natforest {

struct ChampionSpec {
    std::vector<std::string> columns;
    Criterion criterion = Criterion::gini;
    ClassWeight class_weight = ClassWeight::none;
    int n_estimators = 10;
    uint64_t seed = 123;
    uint64_t provenance_num = 0; // results-row num the spec came from
};

ChampionSpec champion_from_row(const SearchRow& row, uint64_t seed);

void write_champion(const std::string& path, const ChampionSpec& champion);
ChampionSpec read_champion(const std::string& path);

// Fits the champion configuration on the labeled sample: the full sample by
// default, or the 80% training part when train_split_only is set. Throws
// DataError naming any champion column missing from the rows.
TrainedForest train_final(const std::vector<UserFeatureRow>& rows,
                          const std::vector<std::pair<UserId, int>>& labels,
                          const ChampionSpec& champion, bool train_split_only = false);

// Fills prob0 / prob1 / pred on every row; pred = 1 iff prob1 > 0.5.
// Parallel over rows, output order unchanged.
void classify_population(const TrainedForest& forest, std::vector<UserFeatureRow>& rows,
                         int workers = 1);

// Rows with pred == 1, order preserved.
std::vector<UserFeatureRow> extract_class1(const std::vector<UserFeatureRow>& rows);

// The high-follower diagnostic: among the top decile by followers, how the
// predictions are distributed.
struct FollowerDiagnostic {
    size_t top_decile_size = 0;
    size_t top_decile_class1 = 0;
    int64_t follower_floor = 0; // smallest follower count inside the decile
};

FollowerDiagnostic follower_diagnostic(const std::vector<UserFeatureRow>& rows);

struct DatasetCount {
    std::string name;
    int64_t successes = 0;  // class-1 rows in the sample
    int64_t sample_size = 0;
    int64_t population = 0; // optional, 0 when unknown
};

struct EvalReportRow {
    std::string name;
    int64_t population = 0;
    int64_t sample_size = 0;
    int64_t class1 = 0;
    int64_t class0 = 0;
    double percent = 0.0;
};

struct EvalReport {
    std::vector<EvalReportRow> before;
    std::vector<EvalReportRow> after;
    double before_mean = 0.0;
    double after_mean = 0.0;
    double delta = 0.0;
};

// Per-dataset percentages plus before/after means and their difference.
// Throws DataError when the two lists disagree on dataset names.
EvalReport build_report(const std::vector<DatasetCount>& before,
                        const std::vector<DatasetCount>& after);

std::string format_report(const EvalReport& report);

} // namespace natforest
