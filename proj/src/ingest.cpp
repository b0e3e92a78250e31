#include "natforest/ingest.hpp"

#include <algorithm>
#include <filesystem>

namespace natforest {

std::vector<TweetRecord> parse_archive(const std::string& path, ParseReport& report) {
    std::vector<TweetRecord> tweets;
    if (path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl") {
        tweets = read_tweets_jsonl(path, report);
    } else {
        tweets = read_tweets_csv(path, report);
    }
    std::sort(tweets.begin(), tweets.end(),
              [](const TweetRecord& a, const TweetRecord& b) { return a.tweet_id < b.tweet_id; });
    return tweets;
}

std::unordered_set<UserId> extract_users(const std::vector<TweetRecord>& tweets) {
    std::unordered_set<UserId> users;
    users.reserve(tweets.size() / 4 + 1);
    for (const auto& t : tweets) users.insert(t.author_id);
    return users;
}

std::unordered_map<TweetId, UserId> build_author_map(const std::vector<TweetRecord>& tweets) {
    std::unordered_map<TweetId, UserId> map;
    map.reserve(tweets.size());
    for (const auto& t : tweets) map.emplace(t.tweet_id, t.author_id);
    return map;
}

std::vector<InteractionEdge> extract_edges(const std::vector<TweetRecord>& tweets,
                                           const std::unordered_map<TweetId, UserId>& author_map,
                                           EdgeReport* report) {
    std::vector<InteractionEdge> edges;
    EdgeReport local;
    for (const auto& t : tweets) {
        for (UserId m : t.mentions) {
            edges.push_back({EdgeKind::mention, t.author_id, m, t.tweet_id});
            ++local.mention_edges;
        }
        if (t.ref_type == RefType::none) continue;

        EdgeKind kind = EdgeKind::retweet;
        if (t.ref_type == RefType::replied_to) kind = EdgeKind::reply;
        if (t.ref_type == RefType::quoted) kind = EdgeKind::quote;

        std::optional<UserId> target;
        if (kind == EdgeKind::reply && t.in_reply_to_user_id) {
            target = t.in_reply_to_user_id;
        } else if (t.ref_author_id) {
            target = t.ref_author_id;
        } else if (t.ref_tweet_id) {
            auto it = author_map.find(*t.ref_tweet_id);
            if (it != author_map.end()) target = it->second;
        }
        if (!target) ++local.unresolved;
        ++local.reference_edges;
        edges.push_back({kind, t.author_id, target, t.tweet_id});
    }
    if (report) *report = local;
    return edges;
}

std::vector<SourceShare> report_sources(const std::vector<TweetRecord>& tweets) {
    std::unordered_map<std::string, size_t> counts;
    for (const auto& t : tweets) ++counts[t.source];

    std::vector<SourceShare> shares;
    shares.reserve(counts.size());
    for (auto& [source, count] : counts) {
        shares.push_back({source, count, 0.0});
    }
    std::sort(shares.begin(), shares.end(), [](const SourceShare& a, const SourceShare& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.source < b.source;
    });
    const double total = static_cast<double>(tweets.size());
    for (auto& s : shares) s.percent = 100.0 * static_cast<double>(s.count) / total;
    return shares;
}

Corpus load_corpus(const std::string& dir) {
    Corpus corpus;
    corpus.tweets = parse_archive(dir + "/tweets.csv", corpus.tweet_report);
    corpus.users = read_users_csv(dir + "/users.csv", corpus.user_report);
    return corpus;
}

void write_corpus(const std::string& dir, const std::vector<TweetRecord>& tweets,
                  const std::vector<UserRecord>& users) {
    std::filesystem::create_directories(dir);
    write_tweets_csv(dir + "/tweets.csv", tweets);
    write_users_csv(dir + "/users.csv", users);
}

} // namespace natforest
