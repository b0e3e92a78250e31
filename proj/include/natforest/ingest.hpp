#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "natforest/archive.hpp"
#include "natforest/records.hpp"

namespace natforest {

// Parses the canonical tweets.csv (or .jsonl for raw v2 objects), returning
// records sorted by tweet_id. Rejected rows are listed in the report.
std::vector<TweetRecord> parse_archive(const std::string& path, ParseReport& report);

// usersIN: the distinct authors of the corpus tweets.
std::unordered_set<UserId> extract_users(const std::vector<TweetRecord>& tweets);

// tweet_id -> author_id over the corpus, used to resolve references whose
// author is not carried on the row (quote hydration).
std::unordered_map<TweetId, UserId> build_author_map(const std::vector<TweetRecord>& tweets);

struct EdgeReport {
    size_t mention_edges = 0;
    size_t reference_edges = 0;
    size_t unresolved = 0; // references whose target author could not be found
};

// One mention edge per mention occurrence; one retweet/reply/quote edge per
// reference. Reply targets prefer in_reply_to_user_id, then the row's
// ref_author_id, then the author map; unresolved references keep target
// absent (excluded from features).
std::vector<InteractionEdge> extract_edges(const std::vector<TweetRecord>& tweets,
                                           const std::unordered_map<TweetId, UserId>& author_map,
                                           EdgeReport* report = nullptr);

struct SourceShare {
    std::string source;
    size_t count = 0;
    double percent = 0.0;
};

// Tweet counts grouped by source, descending; percentages sum to 100.
std::vector<SourceShare> report_sources(const std::vector<TweetRecord>& tweets);

// Corpus directory layout: <dir>/tweets.csv and <dir>/users.csv.
struct Corpus {
    std::vector<TweetRecord> tweets;
    std::vector<UserRecord> users;
    ParseReport tweet_report;
    ParseReport user_report;
};

Corpus load_corpus(const std::string& dir);
void write_corpus(const std::string& dir, const std::vector<TweetRecord>& tweets,
                  const std::vector<UserRecord>& users);

} // namespace natforest
