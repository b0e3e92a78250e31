#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace natforest {

using UserId = uint64_t;
using TweetId = uint64_t;

enum class RefType { none, retweeted, replied_to, quoted };

const char* to_string(RefType t);
std::optional<RefType> ref_type_from_string(const std::string& s);

struct TweetRecord {
    TweetId tweet_id = 0;
    UserId author_id = 0;
    int64_t created_at = 0; // epoch seconds UTC
    std::string lang;
    std::string source;
    std::string text;
    std::optional<UserId> in_reply_to_user_id;
    RefType ref_type = RefType::none;
    std::optional<TweetId> ref_tweet_id;
    std::optional<UserId> ref_author_id;
    std::vector<UserId> mentions;
    int64_t retweet_count = 0;
    int64_t reply_count = 0;
    int64_t like_count = 0;
    int64_t quote_count = 0;
    std::string place_country;

    bool operator==(const TweetRecord&) const = default;
};

struct UserRecord {
    UserId author_id = 0;
    std::string username;
    int64_t created_at = 0;
    bool verified = false;
    int64_t followers = 0;
    int64_t following = 0;
    int64_t tweet_count = 0;
    int64_t listed_count = 0;
    std::string location;
    std::string description;

    bool operator==(const UserRecord&) const = default;
};

enum class EdgeKind { mention, retweet, reply, quote };

const char* to_string(EdgeKind k);

struct InteractionEdge {
    EdgeKind kind = EdgeKind::mention;
    UserId actor = 0;
    std::optional<UserId> target; // absent when the reference could not be resolved
    TweetId tweet_id = 0;

    bool operator==(const InteractionEdge&) const = default;
};

// The 22 quantitative columns in canonical order: 4 profile metrics,
// 5 public-metric sums, 12 directional interaction counts, activity.
inline constexpr std::array<const char*, 22> kQuantitativeColumns = {
    "followers",      "following",      "tweet_count",    "listed_count",
    "cant_tweets_sample", "rt",         "vreplies",       "likes",
    "rquotes",        "mentions_a_In",  "mentions_a_Out", "mentions_de_In",
    "rt_a_In",        "rt_a_Out",       "rt_de_In",       "rp_a_In",
    "rp_a_Out",       "rp_de_In",       "rq_a_In",        "rq_a_Out",
    "rq_de_In",       "activity",
};

inline constexpr size_t kNumQuantitative = kQuantitativeColumns.size();

// Index of a quantitative column by name, or -1.
int quantitative_column_index(const std::string& name);

struct UserFeatureRow {
    UserId author_id = 0;
    std::string username;

    int64_t followers = 0;
    int64_t following = 0;
    int64_t tweet_count = 0;
    int64_t listed_count = 0;

    int64_t cant_tweets_sample = 0;
    int64_t rt = 0;
    int64_t vreplies = 0;
    int64_t likes = 0;
    int64_t rquotes = 0;

    int64_t mentions_a_in = 0, mentions_a_out = 0, mentions_de_in = 0;
    int64_t rt_a_in = 0, rt_a_out = 0, rt_de_in = 0;
    int64_t rp_a_in = 0, rp_a_out = 0, rp_de_in = 0;
    int64_t rq_a_in = 0, rq_a_out = 0, rq_de_in = 0;

    int64_t activity = 0;

    std::optional<int> label;
    std::optional<double> prob0;
    std::optional<double> prob1;
    std::optional<int> pred;

    std::string location;
    std::string description;
    std::string profile_link;

    // Value of the i-th canonical quantitative column.
    int64_t quantitative(size_t i) const;
    int64_t& quantitative(size_t i);
};

} // namespace natforest
