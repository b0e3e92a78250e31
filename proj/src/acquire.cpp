#include "natforest/acquire.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <thread>

#include <httplib.h>

#include "natforest/archive.hpp"
#include "natforest/timeutil.hpp"
#include "natforest/tweet_json.hpp"

namespace natforest {

std::string build_geo_query(const std::string& country, const std::string& lang) {
    if (country.size() != 2 || !std::isalpha(static_cast<unsigned char>(country[0])) ||
        !std::isalpha(static_cast<unsigned char>(country[1]))) {
        throw InvalidQueryError("country must be a 2-letter code, got '" + country + "'");
    }
    std::string q = "place_country:" + country;
    if (!lang.empty()) q += " lang:" + lang;
    return q;
}

std::string build_user_query(const std::vector<std::string>& usernames) {
    if (usernames.empty()) throw InvalidQueryError("user query needs at least one username");
    if (usernames.size() > 40) {
        throw InvalidQueryError("user query limited to 40 usernames, got " +
                                std::to_string(usernames.size()));
    }
    std::string q;
    for (size_t i = 0; i < usernames.size(); ++i) {
        if (usernames[i].empty()) throw InvalidQueryError("empty username in user query");
        if (i) q += " OR ";
        q += "from:" + usernames[i];
    }
    return q;
}

std::vector<std::vector<std::string>> build_batches(const std::vector<std::string>& usernames,
                                                    size_t batch) {
    std::vector<std::vector<std::string>> out;
    for (size_t i = 0; i < usernames.size(); i += batch) {
        const size_t end = std::min(usernames.size(), i + batch);
        out.emplace_back(usernames.begin() + static_cast<long>(i),
                         usernames.begin() + static_cast<long>(end));
    }
    return out;
}

void SearchQuery::validate() const {
    const bool has_users = !from_users.empty();
    const bool has_country = !country.empty();
    if (has_users == has_country) {
        throw InvalidQueryError("exactly one of from_users / country must be set");
    }
    if (from_users.size() > 40) throw InvalidQueryError("at most 40 from_users");
    if (max_results < 10 || max_results > 500) {
        throw InvalidQueryError("max_results must be in [10, 500]");
    }
    auto start = parse_iso8601(start_time);
    auto end = parse_iso8601(end_time);
    if (!start || !end) throw InvalidQueryError("start_time/end_time must be ISO-8601 UTC");
    if (*start >= *end) throw InvalidQueryError("start_time must precede end_time");
}

std::string SearchQuery::query_string() const {
    validate();
    if (!from_users.empty()) return build_user_query(from_users);
    return build_geo_query(country, lang);
}

int64_t SystemClock::now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void SystemClock::sleep_ms(int64_t ms) {
    if (ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
}

void RateBudget::prune(int64_t now) {
    while (!sent_.empty() && now - sent_.front() >= window_ms_) sent_.pop_front();
}

int64_t RateBudget::window_start(int64_t now) const {
    return sent_.empty() ? now : sent_.front();
}

int64_t RateBudget::next_allowed(int64_t now) {
    prune(now);
    if (static_cast<int>(sent_.size()) < max_requests_) return now;
    return sent_.front() + window_ms_;
}

void RateBudget::record(int64_t t) {
    prune(t);
    sent_.push_back(t);
}

int64_t RateBudget::exhausted_until(int64_t now) {
    prune(now);
    return sent_.empty() ? now + window_ms_ : sent_.front() + window_ms_;
}

ArchiveSink::ArchiveSink(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw DataError(path + ": cannot create");
    write_tweets_header(out_);
}

bool ArchiveSink::write(const TweetRecord& tweet) {
    if (!seen_.insert(tweet.tweet_id).second) return false;
    write_tweet_row(out_, tweet);
    ++written_;
    return true;
}

void ArchiveSink::flush() {
    out_.flush();
}

AcquireResult acquire(const SearchQuery& query, const std::string& endpoint,
                      RateBudget& budget, ArchiveSink& sink, Clock& clock,
                      const AcquireOptions& options) {
    AcquireResult result;
    try {
        query.validate();
    } catch (const InvalidQueryError& e) {
        result.error = e.what();
        return result;
    }

    httplib::Client client(endpoint);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);

    const std::string q = query.query_string();
    std::string next_token;
    int retries_left = options.max_retries;
    int64_t backoff = options.initial_backoff_ms;

    for (;;) {
        // Conservative accounting: the request is counted before it is sent.
        const int64_t ready_at = budget.next_allowed(clock.now_ms());
        const int64_t wait = ready_at - clock.now_ms();
        if (wait > 0) clock.sleep_ms(wait);
        budget.record(clock.now_ms());
        ++result.requests_made;

        httplib::Params params{
            {"query", q},
            {"start_time", query.start_time},
            {"end_time", query.end_time},
            {"max_results", std::to_string(query.max_results)},
        };
        if (!next_token.empty()) params.emplace("next_token", next_token);

        auto res = client.Get("/2/tweets/search/all", params, httplib::Headers{});

        if (!res) {
            if (retries_left-- > 0) {
                clock.sleep_ms(backoff);
                backoff *= 2;
                continue;
            }
            result.tweets_written = sink.written();
            result.error = "network failure after retries (httplib error " +
                           std::to_string(static_cast<int>(res.error())) + ")";
            return result;
        }
        if (res->status == 429) {
            const int64_t until = budget.exhausted_until(clock.now_ms());
            clock.sleep_ms(until - clock.now_ms());
            continue;
        }
        if (res->status >= 500) {
            if (retries_left-- > 0) {
                clock.sleep_ms(backoff);
                backoff *= 2;
                continue;
            }
            result.tweets_written = sink.written();
            result.error = "server error " + std::to_string(res->status) + " after retries";
            return result;
        }
        if (res->status != 200) {
            result.tweets_written = sink.written();
            result.error = "unexpected status " + std::to_string(res->status);
            return result;
        }

        retries_left = options.max_retries;
        backoff = options.initial_backoff_ms;

        nlohmann::json page;
        try {
            page = nlohmann::json::parse(res->body);
        } catch (const std::exception&) {
            if (retries_left-- > 0) {
                clock.sleep_ms(backoff);
                backoff *= 2;
                continue;
            }
            result.tweets_written = sink.written();
            result.error = "malformed response body after retries";
            return result;
        }
        ++result.pages;
        if (page.contains("data")) {
            for (const auto& obj : page["data"]) {
                try {
                    sink.write(tweet_from_json(obj));
                } catch (const std::exception&) {
                    ++result.malformed_records; // logged, acquisition continues
                }
            }
        }
        sink.flush();

        next_token.clear();
        if (page.contains("meta") && page["meta"].contains("next_token")) {
            next_token = page["meta"]["next_token"].get<std::string>();
        }
        if (next_token.empty()) break;
    }

    result.tweets_written = sink.written();
    result.complete = true;
    return result;
}

} // namespace natforest
