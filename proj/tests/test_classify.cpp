#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "natforest/archive.hpp"
#include "natforest/classify.hpp"
#include "natforest/rng.hpp"

using namespace natforest;

namespace {

std::string temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "natforest_tests";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

// Population with a clean signal on rt_de_In / rq_de_In for class 1.
std::vector<UserFeatureRow> make_population(size_t n, uint64_t seed, std::vector<int>& truth) {
    Rng rng(seed);
    std::vector<UserFeatureRow> rows(n);
    truth.resize(n);
    for (size_t i = 0; i < n; ++i) {
        auto& r = rows[i];
        r.author_id = 5000 + i;
        r.username = "u" + std::to_string(i);
        const int label = rng.unit() < 0.7 ? 1 : 0;
        truth[i] = label;
        for (size_t c = 0; c < kNumQuantitative; ++c) {
            r.quantitative(c) = static_cast<int64_t>(rng.bounded(4));
        }
        if (label == 1) {
            r.rt_de_in += 20 + static_cast<int64_t>(rng.bounded(10));
            r.rq_de_in += 10 + static_cast<int64_t>(rng.bounded(5));
        }
        r.activity = 0;
        for (size_t c = 9; c < 21; ++c) r.activity += r.quantitative(c);
    }
    return rows;
}

std::vector<std::pair<UserId, int>> labels_of(const std::vector<UserFeatureRow>& rows,
                                              const std::vector<int>& truth, size_t take) {
    std::vector<std::pair<UserId, int>> labels;
    for (size_t i = 0; i < take; ++i) labels.emplace_back(rows[i].author_id, truth[i]);
    return labels;
}

ChampionSpec demo_champion() {
    ChampionSpec champion;
    champion.columns = {"rt_de_In", "rq_a_In", "rq_de_In"};
    champion.criterion = Criterion::gini;
    champion.class_weight = ClassWeight::balanced;
    champion.n_estimators = 10;
    champion.seed = 123;
    champion.provenance_num = 163575;
    return champion;
}

} // namespace

TEST_CASE("champion spec round-trips through its file format") {
    const auto champion = demo_champion();
    const std::string path = temp_path("champion.txt");
    write_champion(path, champion);
    const auto back = read_champion(path);
    CHECK(back.columns == champion.columns);
    CHECK(back.criterion == champion.criterion);
    CHECK(back.class_weight == champion.class_weight);
    CHECK(back.n_estimators == champion.n_estimators);
    CHECK(back.seed == champion.seed);
    CHECK(back.provenance_num == champion.provenance_num);
}

TEST_CASE("champion_from_row keeps the complement of removed columns") {
    SearchRow row;
    row.num = 42;
    row.criterion = Criterion::entropy;
    row.class_weight = ClassWeight::balanced_subsample;
    // remove everything except rt_de_In(14), rp_de_In(17), rq_a_In(18), rq_de_In(20)
    for (int c = 0; c < static_cast<int>(kNumQuantitative); ++c) {
        if (c == 14 || c == 17 || c == 18 || c == 20) continue;
        row.removed_cols.push_back(c);
    }
    const auto champion = champion_from_row(row, 123);
    CHECK(champion.columns ==
          std::vector<std::string>{"rt_de_In", "rp_de_In", "rq_a_In", "rq_de_In"});
    CHECK(champion.provenance_num == 42);
    CHECK(champion.criterion == Criterion::entropy);
}

TEST_CASE("train_final names missing champion columns") {
    std::vector<int> truth;
    auto rows = make_population(60, 3, truth);
    auto labels = labels_of(rows, truth, 60);
    ChampionSpec champion = demo_champion();
    champion.columns = {"rt_de_In", "no_such_column"};
    CHECK_THROWS_WITH_AS(train_final(rows, labels, champion, false),
                         doctest::Contains("no_such_column"), DataError);
}

TEST_CASE("train_final is deterministic and honors the split flag") {
    std::vector<int> truth;
    auto rows = make_population(120, 9, truth);
    auto labels = labels_of(rows, truth, 120);
    const auto champion = demo_champion();

    auto serialize = [](const TrainedForest& f) {
        std::ostringstream out;
        save_model(out, f);
        return out.str();
    };
    const auto full_a = serialize(train_final(rows, labels, champion, false));
    const auto full_b = serialize(train_final(rows, labels, champion, false));
    CHECK(full_a == full_b);

    const auto split_only = serialize(train_final(rows, labels, champion, true));
    CHECK(split_only != full_a); // trained on 96 rows instead of 120
}

TEST_CASE("classify_population fills prob0/prob1/pred on every row") {
    std::vector<int> truth;
    auto rows = make_population(500, 17, truth);
    auto labels = labels_of(rows, truth, 200);
    const auto forest = train_final(rows, labels, demo_champion(), false);

    classify_population(forest, rows, 3);
    size_t positives = 0, negatives = 0;
    for (const auto& r : rows) {
        REQUIRE(r.prob0.has_value());
        REQUIRE(r.prob1.has_value());
        REQUIRE(r.pred.has_value());
        CHECK(*r.prob0 + *r.prob1 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(*r.pred == (*r.prob1 > 0.5 ? 1 : 0));
        (*r.pred == 1 ? positives : negatives) += 1;
    }
    CHECK(positives + negatives == rows.size());
    CHECK(positives > 0);
    CHECK(negatives > 0);

    // worker count cannot change the classification
    auto rows2 = make_population(500, 17, truth);
    classify_population(forest, rows2, 1);
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(*rows[i].prob1 == *rows2[i].prob1);
        CHECK(*rows[i].pred == *rows2[i].pred);
    }

    // the signal is strong enough that the subset is purer than the base rate
    const auto subset = extract_class1(rows);
    CHECK(subset.size() == positives);
    size_t correct = 0;
    for (const auto& r : subset) {
        const size_t idx = static_cast<size_t>(r.author_id - 5000);
        if (truth[idx] == 1) ++correct;
    }
    const double purity = static_cast<double>(correct) / static_cast<double>(subset.size());
    CHECK(purity > 0.7);
}

TEST_CASE("extract_class1 keeps order and only positives") {
    std::vector<UserFeatureRow> rows(5);
    for (size_t i = 0; i < rows.size(); ++i) {
        rows[i].author_id = i;
        rows[i].pred = i % 2 == 0 ? 1 : 0;
    }
    auto subset = extract_class1(rows);
    REQUIRE(subset.size() == 3);
    CHECK(subset[0].author_id == 0);
    CHECK(subset[1].author_id == 2);
    CHECK(subset[2].author_id == 4);

    rows.clear();
    CHECK(extract_class1(rows).empty());
}

TEST_CASE("build_report reproduces the published before/after numbers") {
    std::vector<DatasetCount> before = {
        {"PA", 306, 385, 14789}, {"CR", 296, 385, 9843}, {"NI", 292, 385, 5223}};
    std::vector<DatasetCount> after = {
        {"PA", 362, 385, 6392}, {"CR", 351, 385, 3886}, {"NI", 345, 385, 1343}};
    const auto report = build_report(before, after);

    CHECK(report.before[0].percent == doctest::Approx(79.48).epsilon(0.0002));
    CHECK(report.before[1].percent == doctest::Approx(76.88).epsilon(0.0002));
    CHECK(report.before[2].percent == doctest::Approx(75.84).epsilon(0.0002));
    CHECK(report.after[0].percent == doctest::Approx(94.03).epsilon(0.0002));
    CHECK(report.after[1].percent == doctest::Approx(91.17).epsilon(0.0002));
    CHECK(report.after[2].percent == doctest::Approx(89.61).epsilon(0.0002));
    CHECK(report.before_mean == doctest::Approx(77.40).epsilon(0.0002));
    CHECK(report.after_mean == doctest::Approx(91.60).epsilon(0.0002));
    CHECK(report.delta == doctest::Approx(14.20).epsilon(0.0002));
    CHECK(report.before[0].class0 == 79);

    const auto text = format_report(report);
    CHECK(text.find("77.40") != std::string::npos);
    CHECK(text.find("91.60") != std::string::npos);
    CHECK(text.find("14.20") != std::string::npos);
}

TEST_CASE("build_report edge cases") {
    // identical before/after -> zero delta
    std::vector<DatasetCount> same = {{"X", 100, 200, 0}};
    const auto zero = build_report(same, same);
    CHECK(zero.delta == doctest::Approx(0.0));

    // single dataset: mean is that row's percentage
    CHECK(zero.before_mean == doctest::Approx(50.0));

    // mismatched names rejected
    std::vector<DatasetCount> other = {{"Y", 100, 200, 0}};
    CHECK_THROWS_AS(build_report(same, other), DataError);

    // bad counts rejected
    std::vector<DatasetCount> bad = {{"X", 300, 200, 0}};
    CHECK_THROWS_AS(build_report(bad, bad), DataError);
}

TEST_CASE("follower diagnostic counts the top decile") {
    std::vector<UserFeatureRow> rows(20);
    for (size_t i = 0; i < rows.size(); ++i) {
        rows[i].author_id = i;
        rows[i].followers = static_cast<int64_t>(i * 100);
        rows[i].pred = i >= 18 ? 0 : 1; // the two biggest accounts predicted 0
    }
    const auto diag = follower_diagnostic(rows);
    CHECK(diag.top_decile_size == 2);
    CHECK(diag.top_decile_class1 == 0);
    CHECK(diag.follower_floor == 1800);
}
