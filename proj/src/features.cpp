#include "natforest/features.hpp"

#include <algorithm>
#include <unordered_map>

namespace natforest {

namespace {

// Offsets of the directional column triplets inside UserFeatureRow's
// quantitative block: mentions at 9, rt at 12, rp at 15, rq at 18.
size_t triplet_base(EdgeKind kind) {
    switch (kind) {
    case EdgeKind::mention: return 9;
    case EdgeKind::retweet: return 12;
    case EdgeKind::reply: return 15;
    case EdgeKind::quote: return 18;
    }
    return 9;
}

} // namespace

std::vector<UserFeatureRow> compute_features(const std::vector<TweetRecord>& tweets,
                                             const std::vector<InteractionEdge>& edges,
                                             const std::unordered_set<UserId>& users_in,
                                             const std::vector<UserRecord>& users) {
    std::unordered_map<UserId, UserFeatureRow> rows;
    rows.reserve(users_in.size());
    for (UserId id : users_in) {
        UserFeatureRow r;
        r.author_id = id;
        rows.emplace(id, std::move(r));
    }

    for (const auto& u : users) {
        auto it = rows.find(u.author_id);
        if (it == rows.end()) continue;
        it->second.username = u.username;
        it->second.followers = u.followers;
        it->second.following = u.following;
        it->second.tweet_count = u.tweet_count;
        it->second.listed_count = u.listed_count;
        it->second.location = u.location;
        it->second.description = u.description;
        if (!u.username.empty()) {
            it->second.profile_link = "https://twitter.com/" + u.username;
        }
    }

    for (const auto& t : tweets) {
        auto it = rows.find(t.author_id);
        if (it == rows.end()) continue;
        auto& r = it->second;
        r.cant_tweets_sample += 1;
        r.rt += t.retweet_count;
        r.vreplies += t.reply_count;
        r.likes += t.like_count;
        r.rquotes += t.quote_count;
    }

    for (const auto& e : edges) {
        if (!e.target) continue;                 // unresolved references carry no signal
        if (*e.target == e.actor) continue;      // self-edges excluded from all counts
        const size_t base = triplet_base(e.kind);
        const bool target_in = users_in.count(*e.target) > 0;

        auto actor_it = rows.find(e.actor);
        if (actor_it != rows.end()) {
            // *_a_In / *_a_Out from the actor's side.
            actor_it->second.quantitative(target_in ? base : base + 1) += 1;
        }
        if (target_in && users_in.count(e.actor) > 0) {
            auto target_it = rows.find(*e.target);
            if (target_it != rows.end()) {
                target_it->second.quantitative(base + 2) += 1; // *_de_In
            }
        }
    }

    std::vector<UserFeatureRow> out;
    out.reserve(rows.size());
    for (auto& [id, r] : rows) {
        int64_t activity = 0;
        for (size_t i = 9; i < 21; ++i) activity += r.quantitative(i);
        r.activity = activity;
        out.push_back(std::move(r));
    }
    std::sort(out.begin(), out.end(), [](const UserFeatureRow& a, const UserFeatureRow& b) {
        return a.author_id < b.author_id;
    });
    return out;
}

} // namespace natforest
