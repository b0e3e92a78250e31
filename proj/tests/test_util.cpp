#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "natforest/csv.hpp"
#include "natforest/rng.hpp"
#include "natforest/stats.hpp"
#include "natforest/timeutil.hpp"

using namespace natforest;

TEST_CASE("rng streams are deterministic and seed-sensitive") {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    bool differs = false;
    Rng a2(42);
    for (int i = 0; i < 100; ++i) {
        if (a2.next() != c.next()) differs = true;
    }
    CHECK(differs);
}

TEST_CASE("bounded draws stay in range and look uniform-ish") {
    Rng rng(7);
    size_t buckets[10] = {0};
    for (int i = 0; i < 100000; ++i) {
        const uint64_t v = rng.bounded(10);
        REQUIRE(v < 10);
        ++buckets[v];
    }
    for (size_t b : buckets) {
        CHECK(b > 9000);
        CHECK(b < 11000);
    }
}

TEST_CASE("sample_without_replacement gives distinct indices") {
    Rng rng(1);
    auto s = rng.sample_without_replacement(100, 40);
    std::set<size_t> dedup(s.begin(), s.end());
    CHECK(dedup.size() == 40);
    for (size_t v : s) CHECK(v < 100);
    CHECK_THROWS(rng.sample_without_replacement(5, 6));
}

TEST_CASE("poisson and negative binomial hit their means") {
    Rng rng(11);
    double sum = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.poisson(6.0));
    CHECK(sum / n == doctest::Approx(6.0).epsilon(0.03));

    sum = 0;
    double sq = 0;
    for (int i = 0; i < n; ++i) {
        const double v = static_cast<double>(rng.neg_binomial(8.0, 0.5));
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(mean == doctest::Approx(8.0).epsilon(0.05));
    CHECK(var > 2.0 * mean); // overdispersed vs the Poisson baseline
}

TEST_CASE("normal quantile reference values") {
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
    CHECK(normal_quantile(0.025) == doctest::Approx(-1.959964).epsilon(1e-6));
    CHECK(two_sided_z(0.95) == doctest::Approx(1.959964).epsilon(1e-6));
    CHECK(two_sided_z(0.99) == doctest::Approx(2.575829).epsilon(1e-6));
    CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(two_sided_z(1.0), std::domain_error);
}

TEST_CASE("iso8601 parse and format") {
    auto t = parse_iso8601("2021-01-01T00:00:00Z");
    REQUIRE(t.has_value());
    CHECK(*t == 1609459200);
    CHECK(format_iso8601(*t) == "2021-01-01T00:00:00Z");

    auto frac = parse_iso8601("2010-11-10T17:52:56.000Z");
    REQUIRE(frac.has_value());
    CHECK(format_iso8601(*frac) == "2010-11-10T17:52:56Z");

    CHECK(!parse_iso8601("2021-01-01").has_value());
    CHECK(!parse_iso8601("2021-13-01T00:00:00Z").has_value());
    CHECK(!parse_iso8601("garbage").has_value());
}

TEST_CASE("csv quoting round-trips awkward payloads") {
    std::vector<std::vector<std::string>> rows = {
        {"plain", "with,comma", "with\"quote"},
        {"multi\nline", "", "trailing "},
        {"ütf-8 ✓", "semi;colon", "\"quoted\""},
    };
    std::ostringstream out;
    for (const auto& r : rows) csv_write_row(out, r);

    std::istringstream in(out.str());
    CsvReader reader(in);
    std::vector<std::string> fields;
    for (const auto& expect : rows) {
        REQUIRE(reader.next(fields));
        CHECK(fields == expect);
    }
    CHECK(!reader.next(fields));
}

TEST_CASE("csv reader accepts crlf") {
    std::istringstream in("a,b\r\nc,d\r\n");
    CsvReader reader(in);
    std::vector<std::string> fields;
    REQUIRE(reader.next(fields));
    CHECK(fields == std::vector<std::string>{"a", "b"});
    REQUIRE(reader.next(fields));
    CHECK(fields == std::vector<std::string>{"c", "d"});
}

TEST_CASE("semicolon helpers") {
    CHECK(split_semicolons("").empty());
    CHECK(split_semicolons("1;2;3") == std::vector<std::string>{"1", "2", "3"});
    CHECK(join_semicolons({"a", "b"}) == "a;b");
    CHECK(split_semicolons("a;;b") == std::vector<std::string>{"a", "", "b"});
}
