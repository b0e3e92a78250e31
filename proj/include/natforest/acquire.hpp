#pragma once

#include <cstdint>
#include <deque>
#include <fstream>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "natforest/records.hpp"

namespace natforest {

class InvalidQueryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// "place_country:<CC> lang:<tag>". Throws InvalidQueryError unless the
// country is a 2-letter code.
std::string build_geo_query(const std::string& country, const std::string& lang);

// "from:u1 OR from:u2 OR ...". Throws InvalidQueryError when empty or when
// more than 40 names are given.
std::string build_user_query(const std::vector<std::string>& usernames);

// Splits a roster into from-query batches of at most `batch` names.
std::vector<std::vector<std::string>> build_batches(const std::vector<std::string>& usernames,
                                                    size_t batch = 40);

struct SearchQuery {
    std::string country;               // 2-letter code, or empty
    std::string lang;                  // BCP-47 tag, or empty
    std::vector<std::string> from_users;
    std::string start_time;            // ISO-8601 UTC
    std::string end_time;
    int max_results = 500;

    // from_users XOR country, max_results in [10, 500], |from_users| <= 40,
    // start < end. Throws InvalidQueryError.
    void validate() const;
    std::string query_string() const;
};

// Time source; swapped for a fake in tests so window waits are instant.
class Clock {
public:
    virtual ~Clock() = default;
    virtual int64_t now_ms() = 0;
    virtual void sleep_ms(int64_t ms) = 0;
};

class SystemClock : public Clock {
public:
    int64_t now_ms() override;
    void sleep_ms(int64_t ms) override;
};

// Sliding-window request budget, accounted client-side before each send so a
// request can never be the one that trips the server.
class RateBudget {
public:
    RateBudget(int max_requests = 300, int64_t window_ms = 15 * 60 * 1000)
        : max_requests_(max_requests), window_ms_(window_ms) {}

    int max_requests() const { return max_requests_; }
    int64_t window_ms() const { return window_ms_; }
    // Requests inside the current window.
    int used() const { return static_cast<int>(sent_.size()); }
    // Timestamp of the oldest in-window request, or `now` when idle.
    int64_t window_start(int64_t now) const;

    // Earliest time a new request may be sent.
    int64_t next_allowed(int64_t now);
    // Accounts one request at time `t` (call before sending).
    void record(int64_t t);
    // 429 handling: the window is treated as exhausted until it elapses.
    int64_t exhausted_until(int64_t now);

private:
    void prune(int64_t now);

    int max_requests_;
    int64_t window_ms_;
    std::deque<int64_t> sent_;
};

// Streams tweets to the canonical tweets.csv, dropping duplicate ids within
// the run.
class ArchiveSink {
public:
    explicit ArchiveSink(const std::string& path);

    // Returns true when written, false when the id was already seen.
    bool write(const TweetRecord& tweet);
    size_t written() const { return written_; }
    void flush();

private:
    std::ofstream out_;
    std::unordered_set<TweetId> seen_;
    size_t written_ = 0;
};

struct AcquireOptions {
    int max_retries = 3;
    int64_t initial_backoff_ms = 1000; // doubles per retry
};

struct AcquireResult {
    size_t tweets_written = 0;
    size_t requests_made = 0;
    size_t pages = 0;
    size_t malformed_records = 0;
    bool complete = false;
    std::string error; // set when !complete
};

// Pages through <endpoint>/2/tweets/search/all until next_token runs out,
// honouring the budget (waiting out the window when it is exhausted or the
// server answers 429). Transient failures retry with doubling backoff; when
// retries run out the result carries the count so far with complete=false.
AcquireResult acquire(const SearchQuery& query, const std::string& endpoint,
                      RateBudget& budget, ArchiveSink& sink, Clock& clock,
                      const AcquireOptions& options = {});

} // namespace natforest
