#include <doctest.h>

#include <filesystem>
#include <set>

#include "mock_server.hpp"
#include "natforest/acquire.hpp"
#include "natforest/archive.hpp"

using namespace natforest;

namespace {

std::string temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "natforest_tests";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

SearchQuery geo_query() {
    SearchQuery q;
    q.country = "PA";
    q.lang = "en";
    q.start_time = "2021-01-01T00:00:00Z";
    q.end_time = "2021-12-31T00:00:00Z";
    q.max_results = 500;
    return q;
}

} // namespace

TEST_CASE("build_geo_query formats the filter string") {
    CHECK(build_geo_query("PA", "en") == "place_country:PA lang:en");
    CHECK(build_geo_query("NI", "es") == "place_country:NI lang:es");
    CHECK_THROWS_AS(build_geo_query("", "en"), InvalidQueryError);
    CHECK_THROWS_AS(build_geo_query("PAN", "en"), InvalidQueryError);
    CHECK_THROWS_AS(build_geo_query("P1", "en"), InvalidQueryError);
}

TEST_CASE("build_user_query joins from: clauses in order") {
    CHECK(build_user_query({"user1", "user2"}) == "from:user1 OR from:user2");
    CHECK(build_user_query({"only"}) == "from:only");
    CHECK_THROWS_AS(build_user_query({}), InvalidQueryError);
    std::vector<std::string> many(41, "u");
    CHECK_THROWS_AS(build_user_query(many), InvalidQueryError);
    std::vector<std::string> forty(40, "u");
    CHECK_NOTHROW(build_user_query(forty));
}

TEST_CASE("build_batches partitions the roster exactly") {
    std::vector<std::string> users;
    for (int i = 0; i < 103; ++i) users.push_back("u" + std::to_string(i));
    auto batches = build_batches(users, 40);
    REQUIRE(batches.size() == 3); // ceil(103/40)
    CHECK(batches[0].size() == 40);
    CHECK(batches[1].size() == 40);
    CHECK(batches[2].size() == 23);
    size_t idx = 0;
    for (const auto& batch : batches) {
        for (const auto& u : batch) CHECK(u == users[idx++]);
    }
    CHECK(idx == users.size());
    CHECK(build_batches({}, 40).empty());
}

TEST_CASE("SearchQuery validation") {
    SearchQuery q = geo_query();
    CHECK_NOTHROW(q.validate());
    CHECK(q.query_string() == "place_country:PA lang:en");

    SearchQuery both = geo_query();
    both.from_users = {"a"};
    CHECK_THROWS_AS(both.validate(), InvalidQueryError);

    SearchQuery neither;
    neither.start_time = "2021-01-01T00:00:00Z";
    neither.end_time = "2021-02-01T00:00:00Z";
    CHECK_THROWS_AS(neither.validate(), InvalidQueryError);

    SearchQuery small = geo_query();
    small.max_results = 5;
    CHECK_THROWS_AS(small.validate(), InvalidQueryError);
    small.max_results = 501;
    CHECK_THROWS_AS(small.validate(), InvalidQueryError);

    SearchQuery backwards = geo_query();
    backwards.start_time = backwards.end_time;
    CHECK_THROWS_AS(backwards.validate(), InvalidQueryError);

    SearchQuery users;
    users.from_users = {"a", "b"};
    users.start_time = "2021-01-01T00:00:00Z";
    users.end_time = "2021-02-01T00:00:00Z";
    CHECK(users.query_string() == "from:a OR from:b");
}

TEST_CASE("RateBudget slides its window") {
    RateBudget budget(3, 1000);
    CHECK(budget.next_allowed(0) == 0);
    budget.record(0);
    budget.record(100);
    budget.record(200);
    CHECK(budget.used() == 3);
    CHECK(budget.window_start(250) == 0);
    // full: the next slot opens when the oldest request leaves the window
    CHECK(budget.next_allowed(250) == 1000);
    // at t=1000 the first request has aged out
    CHECK(budget.next_allowed(1000) == 1000);
    budget.record(1000);
    CHECK(budget.next_allowed(1050) == 1100);
    CHECK(budget.exhausted_until(1050) == 1100);
}

TEST_CASE("acquire pages through 1200 tweets in 3 requests") {
    mock::FakeClock clock;
    mock::ServerOptions options;
    options.corpus_size = 1200;
    options.clock = &clock;
    mock::MockTwitterServer server(options);

    RateBudget budget;
    ArchiveSink sink(temp_path("acq1200.csv"));
    const auto result = acquire(geo_query(), server.base_url(), budget, sink, clock);

    CHECK(result.complete);
    CHECK(result.tweets_written == 1200);
    CHECK(result.requests_made == 3);
    CHECK(result.pages == 3);
    CHECK(server.requests_seen() == 3);

    ParseReport report;
    auto tweets = read_tweets_csv(temp_path("acq1200.csv"), report);
    CHECK(tweets.size() == 1200);
    CHECK(report.rejects.empty());
}

TEST_CASE("acquire on an empty corpus stops after the first request") {
    mock::FakeClock clock;
    mock::ServerOptions options;
    options.corpus_size = 0;
    options.clock = &clock;
    mock::MockTwitterServer server(options);

    RateBudget budget;
    ArchiveSink sink(temp_path("acq0.csv"));
    const auto result = acquire(geo_query(), server.base_url(), budget, sink, clock);
    CHECK(result.complete);
    CHECK(result.tweets_written == 0);
    CHECK(result.requests_made == 1);
}

TEST_CASE("429 responses idle the client until the window ends") {
    mock::FakeClock clock;
    mock::ServerOptions options;
    options.corpus_size = 5000; // 10 pages of 500
    options.rate_limit = 5;     // server allows 5 per window
    options.clock = &clock;
    mock::MockTwitterServer server(options);

    RateBudget budget; // client thinks it has 300; the server is stricter
    ArchiveSink sink(temp_path("acq429.csv"));
    const auto result = acquire(geo_query(), server.base_url(), budget, sink, clock);

    CHECK(result.complete);
    CHECK(result.tweets_written == 5000);
    // 10 succeeding pages plus one 429'd attempt
    CHECK(result.requests_made == 11);
    CHECK(clock.now_ms() >= 900000); // it waited out the window
}

TEST_CASE("client-side budget keeps every sliding window under the cap") {
    mock::FakeClock clock;
    mock::ServerOptions options;
    options.corpus_size = 150200; // 301 pages of 500
    options.clock = &clock;
    mock::MockTwitterServer server(options);

    RateBudget budget(300, 900000);
    ArchiveSink sink(temp_path("acq301.csv"));
    const auto result = acquire(geo_query(), server.base_url(), budget, sink, clock);

    CHECK(result.complete);
    CHECK(result.tweets_written == 150200);
    CHECK(result.requests_made == 301);

    const auto times = server.request_times();
    REQUIRE(times.size() == 301);
    for (size_t i = 0; i + 300 < times.size(); ++i) {
        CHECK(times[i + 300] - times[i] >= 900000);
    }
}

TEST_CASE("duplicate tweet ids are dropped within a run") {
    mock::FakeClock clock;
    mock::ServerOptions options;
    options.corpus_size = 1000;
    options.duplicate_at = 700; // tweet 700 is served with tweet 1's id
    options.clock = &clock;
    mock::MockTwitterServer server(options);

    RateBudget budget;
    ArchiveSink sink(temp_path("acqdup.csv"));
    const auto result = acquire(geo_query(), server.base_url(), budget, sink, clock);
    CHECK(result.complete);
    CHECK(result.tweets_written == 999);

    ParseReport report;
    auto tweets = read_tweets_csv(temp_path("acqdup.csv"), report);
    std::set<TweetId> ids;
    for (const auto& t : tweets) ids.insert(t.tweet_id);
    CHECK(ids.size() == tweets.size());
}

TEST_CASE("malformed records are logged and skipped, not fatal") {
    mock::FakeClock clock;
    mock::ServerOptions options;
    options.corpus_size = 600;
    options.corrupt_at = 42;
    options.clock = &clock;
    mock::MockTwitterServer server(options);

    RateBudget budget;
    ArchiveSink sink(temp_path("acqbad.csv"));
    const auto result = acquire(geo_query(), server.base_url(), budget, sink, clock);
    CHECK(result.complete);
    CHECK(result.malformed_records == 1);
    CHECK(result.tweets_written == 599);
}

TEST_CASE("network failure after retries reports a partial result") {
    mock::FakeClock clock;
    RateBudget budget;
    ArchiveSink sink(temp_path("acqfail.csv"));
    // nothing listens on this port
    const auto result = acquire(geo_query(), "http://127.0.0.1:1", budget, sink, clock);
    CHECK(!result.complete);
    CHECK(!result.error.empty());
    CHECK(result.tweets_written == 0);
    CHECK(result.requests_made == 4); // initial try + 3 retries
}

TEST_CASE("ArchiveSink dedups by tweet id") {
    ArchiveSink sink(temp_path("sink.csv"));
    TweetRecord t;
    t.tweet_id = 1;
    t.author_id = 2;
    t.created_at = 0;
    CHECK(sink.write(t));
    CHECK(!sink.write(t));
    CHECK(sink.written() == 1);
}
