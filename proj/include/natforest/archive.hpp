#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "natforest/records.hpp"

namespace natforest {

// Fatal archive problems (missing file, missing/garbled header).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RowError {
    size_t line = 0; // 1-based line where the record started
    std::string reason;
};

struct ParseReport {
    size_t rows_read = 0;
    size_t rows_accepted = 0;
    std::vector<RowError> rejects;
};

// Canonical tweets.csv header, in exact column order.
extern const std::vector<std::string> kTweetColumns;
extern const std::vector<std::string> kUserColumns;
extern const std::vector<std::string> kFeatureColumns;

// --- tweets.csv -----------------------------------------------------------

void write_tweets_header(std::ostream& out);
void write_tweet_row(std::ostream& out, const TweetRecord& t);
void write_tweets_csv(const std::string& path, const std::vector<TweetRecord>& tweets);

// Rows that violate the schema are skipped and recorded in the report.
// Throws DataError when the file is unreadable or the header is wrong.
std::vector<TweetRecord> read_tweets_csv(const std::string& path, ParseReport& report);

// Raw v2 tweet objects, one JSON object per line, mapped onto the same records.
std::vector<TweetRecord> read_tweets_jsonl(const std::string& path, ParseReport& report);

// --- users.csv ------------------------------------------------------------

void write_users_csv(const std::string& path, const std::vector<UserRecord>& users);
std::vector<UserRecord> read_users_csv(const std::string& path, ParseReport& report);

// --- features.csv ---------------------------------------------------------

void write_features_csv(const std::string& path, const std::vector<UserFeatureRow>& rows);
std::vector<UserFeatureRow> read_features_csv(const std::string& path, ParseReport& report);

// --- truth.csv (author_id,label) -------------------------------------------

struct TruthRow {
    UserId author_id = 0;
    int label = 0;
};

void write_truth_csv(const std::string& path, const std::vector<TruthRow>& rows);
std::vector<TruthRow> read_truth_csv(const std::string& path);

} // namespace natforest
