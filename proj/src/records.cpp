#include "natforest/records.hpp"

#include <stdexcept>

namespace natforest {

const char* to_string(RefType t) {
    switch (t) {
    case RefType::none: return "none";
    case RefType::retweeted: return "retweeted";
    case RefType::replied_to: return "replied_to";
    case RefType::quoted: return "quoted";
    }
    return "none";
}

std::optional<RefType> ref_type_from_string(const std::string& s) {
    if (s.empty() || s == "none") return RefType::none;
    if (s == "retweeted") return RefType::retweeted;
    if (s == "replied_to") return RefType::replied_to;
    if (s == "quoted") return RefType::quoted;
    return std::nullopt;
}

const char* to_string(EdgeKind k) {
    switch (k) {
    case EdgeKind::mention: return "mention";
    case EdgeKind::retweet: return "retweet";
    case EdgeKind::reply: return "reply";
    case EdgeKind::quote: return "quote";
    }
    return "mention";
}

int quantitative_column_index(const std::string& name) {
    for (size_t i = 0; i < kQuantitativeColumns.size(); ++i) {
        if (name == kQuantitativeColumns[i]) return static_cast<int>(i);
    }
    return -1;
}

int64_t UserFeatureRow::quantitative(size_t i) const {
    return const_cast<UserFeatureRow*>(this)->quantitative(i);
}

int64_t& UserFeatureRow::quantitative(size_t i) {
    switch (i) {
    case 0: return followers;
    case 1: return following;
    case 2: return tweet_count;
    case 3: return listed_count;
    case 4: return cant_tweets_sample;
    case 5: return rt;
    case 6: return vreplies;
    case 7: return likes;
    case 8: return rquotes;
    case 9: return mentions_a_in;
    case 10: return mentions_a_out;
    case 11: return mentions_de_in;
    case 12: return rt_a_in;
    case 13: return rt_a_out;
    case 14: return rt_de_in;
    case 15: return rp_a_in;
    case 16: return rp_a_out;
    case 17: return rp_de_in;
    case 18: return rq_a_in;
    case 19: return rq_a_out;
    case 20: return rq_de_in;
    case 21: return activity;
    }
    throw std::out_of_range("quantitative column index");
}

} // namespace natforest
