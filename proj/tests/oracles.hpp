#pragma once

// Independent reference implementations the unit and acceptance suites check
// the library against. Everything here recomputes from first principles and
// must stay decoupled from the code under test.

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "natforest/forest.hpp"
#include "natforest/records.hpp"

namespace oracle {

// Impurity via alternative formulas: 2*p0*p1 for gini, natural-log entropy
// rescaled to bits.
inline double impurity(double w0, double w1, natforest::Criterion c) {
    const double w = w0 + w1;
    const double p0 = w0 / w;
    const double p1 = w1 / w;
    if (c == natforest::Criterion::gini) return 2.0 * p0 * p1;
    double h = 0.0;
    if (p0 > 0.0) h -= p0 * std::log(p0);
    if (p1 > 0.0) h -= p1 * std::log(p1);
    return h / std::log(2.0);
}

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Every (feature, midpoint-between-distinct-values) candidate with its gain,
// each impurity recounted from scratch. Returned in (feature, threshold)
// order.
inline std::vector<SplitCandidate> all_splits(const natforest::Dataset& ds,
                                              const std::vector<size_t>& rows,
                                              const std::vector<double>& weights,
                                              const std::vector<int>& features,
                                              natforest::Criterion crit) {
    std::vector<SplitCandidate> out;
    double w0 = 0, w1 = 0;
    for (size_t i = 0; i < rows.size(); ++i) {
        (ds.labels[rows[i]] == 1 ? w1 : w0) += weights[i];
    }
    if (w0 <= 0 || w1 <= 0) return out;
    const double parent = oracle::impurity(w0, w1, crit);
    const double w_total = w0 + w1;

    std::vector<int> ordered = features;
    std::sort(ordered.begin(), ordered.end());
    for (int f : ordered) {
        std::set<double> values;
        for (size_t i = 0; i < rows.size(); ++i) {
            values.insert(ds.columns[static_cast<size_t>(f)][rows[i]]);
        }
        std::vector<double> sorted_values(values.begin(), values.end());
        for (size_t v = 0; v + 1 < sorted_values.size(); ++v) {
            const double threshold =
                sorted_values[v] + (sorted_values[v + 1] - sorted_values[v]) / 2.0;
            double l0 = 0, l1 = 0, r0 = 0, r1 = 0;
            for (size_t i = 0; i < rows.size(); ++i) {
                const double x = ds.columns[static_cast<size_t>(f)][rows[i]];
                const bool left = x <= threshold;
                if (ds.labels[rows[i]] == 1) {
                    (left ? l1 : r1) += weights[i];
                } else {
                    (left ? l0 : r0) += weights[i];
                }
            }
            if (l0 + l1 <= 0 || r0 + r1 <= 0) continue;
            const double gain = parent - ((l0 + l1) * oracle::impurity(l0, l1, crit) +
                                          (r0 + r1) * oracle::impurity(r0, r1, crit)) /
                                             w_total;
            out.push_back({f, threshold, gain});
        }
    }
    return out;
}

inline std::optional<SplitCandidate> best_of(const std::vector<SplitCandidate>& candidates) {
    std::optional<SplitCandidate> best;
    for (const auto& c : candidates) {
        if (!best || c.gain > best->gain) best = c;
    }
    return best;
}

// Naive per-user feature recount straight from the tweet rows, mirroring the
// column definitions rather than the edge machinery.
struct UserCounts {
    int64_t cant = 0, rt = 0, vreplies = 0, likes = 0, rquotes = 0;
    int64_t dir[12] = {0}; // mentions a_In/a_Out/de_In, rt..., rp..., rq...
    int64_t activity() const {
        int64_t a = 0;
        for (int64_t v : dir) a += v;
        return a;
    }
};

inline std::optional<natforest::UserId> resolve_reference(
    const natforest::TweetRecord& t,
    const std::unordered_map<natforest::TweetId, natforest::UserId>& author_map) {
    if (t.ref_type == natforest::RefType::replied_to && t.in_reply_to_user_id) {
        return t.in_reply_to_user_id;
    }
    if (t.ref_author_id) return t.ref_author_id;
    if (t.ref_tweet_id) {
        auto it = author_map.find(*t.ref_tweet_id);
        if (it != author_map.end()) return it->second;
    }
    return std::nullopt;
}

inline std::map<natforest::UserId, UserCounts> recount_features(
    const std::vector<natforest::TweetRecord>& tweets) {
    std::unordered_set<natforest::UserId> users_in;
    std::unordered_map<natforest::TweetId, natforest::UserId> author_map;
    for (const auto& t : tweets) {
        users_in.insert(t.author_id);
        author_map.emplace(t.tweet_id, t.author_id);
    }

    std::map<natforest::UserId, UserCounts> counts;
    for (natforest::UserId u : users_in) counts[u];

    auto action_base = [](natforest::RefType rt) {
        switch (rt) {
        case natforest::RefType::retweeted: return 3;
        case natforest::RefType::replied_to: return 6;
        case natforest::RefType::quoted: return 9;
        default: return -1;
        }
    };

    for (const auto& t : tweets) {
        UserCounts& author = counts[t.author_id];
        author.cant += 1;
        author.rt += t.retweet_count;
        author.vreplies += t.reply_count;
        author.likes += t.like_count;
        author.rquotes += t.quote_count;

        for (natforest::UserId m : t.mentions) {
            if (m == t.author_id) continue;
            if (users_in.count(m)) {
                author.dir[0] += 1;
                counts[m].dir[2] += 1;
            } else {
                author.dir[1] += 1;
            }
        }
        const int base = action_base(t.ref_type);
        if (base < 0) continue;
        auto target = resolve_reference(t, author_map);
        if (!target || *target == t.author_id) continue;
        if (users_in.count(*target)) {
            author.dir[static_cast<size_t>(base)] += 1;
            counts[*target].dir[static_cast<size_t>(base) + 2] += 1;
        } else {
            author.dir[static_cast<size_t>(base) + 1] += 1;
        }
    }
    return counts;
}

} // namespace oracle
