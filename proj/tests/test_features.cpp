#include <doctest.h>

#include <array>

#include "natforest/features.hpp"
#include "natforest/rng.hpp"
#include "oracles.hpp"

using namespace natforest;

namespace {

TweetRecord tweet(TweetId id, UserId author) {
    TweetRecord t;
    t.tweet_id = id;
    t.author_id = author;
    t.created_at = 1609459200 + static_cast<int64_t>(id);
    t.lang = "es";
    t.source = "x";
    t.text = "t";
    return t;
}

// Builds a corpus where user `u` ends up with exactly the requested 12
// directional counts (mentions, rt, rp, rq) x (a_In, a_Out, de_In).
std::vector<TweetRecord> corpus_for(const std::array<int, 12>& dir, UserId u = 1,
                                    UserId peer = 2) {
    std::vector<TweetRecord> tweets;
    TweetId next = 1;
    const UserId outsider = 900;
    TweetId out_ref = 5000;

    tweets.push_back(tweet(next++, u));    // base tweet (referenced by peer)
    tweets.push_back(tweet(next++, peer)); // peer's base tweet
    const TweetId u_base = 1, peer_base = 2;

    const RefType kinds[4] = {RefType::none, RefType::retweeted, RefType::replied_to,
                              RefType::quoted};
    for (int action = 0; action < 4; ++action) {
        const int a_in = dir[static_cast<size_t>(action) * 3];
        const int a_out = dir[static_cast<size_t>(action) * 3 + 1];
        const int de_in = dir[static_cast<size_t>(action) * 3 + 2];
        for (int i = 0; i < a_in; ++i) {
            TweetRecord t = tweet(next++, u);
            if (action == 0) {
                t.mentions.push_back(peer);
            } else {
                t.ref_type = kinds[action];
                t.ref_tweet_id = peer_base;
                if (action == 2) t.in_reply_to_user_id = peer;
            }
            tweets.push_back(std::move(t));
        }
        for (int i = 0; i < a_out; ++i) {
            TweetRecord t = tweet(next++, u);
            if (action == 0) {
                t.mentions.push_back(outsider);
            } else {
                t.ref_type = kinds[action];
                t.ref_tweet_id = out_ref++;
                t.ref_author_id = outsider;
                if (action == 2) t.in_reply_to_user_id = outsider;
            }
            tweets.push_back(std::move(t));
        }
        for (int i = 0; i < de_in; ++i) {
            TweetRecord t = tweet(next++, peer);
            if (action == 0) {
                t.mentions.push_back(u);
            } else {
                t.ref_type = kinds[action];
                t.ref_tweet_id = u_base;
                if (action == 2) t.in_reply_to_user_id = u;
            }
            tweets.push_back(std::move(t));
        }
    }
    return tweets;
}

std::vector<UserFeatureRow> features_of(const std::vector<TweetRecord>& tweets,
                                        const std::vector<UserRecord>& users = {}) {
    const auto users_in = extract_users(tweets);
    const auto edges = extract_edges(tweets, build_author_map(tweets));
    return compute_features(tweets, edges, users_in, users);
}

const UserFeatureRow& row_of(const std::vector<UserFeatureRow>& rows, UserId id) {
    for (const auto& r : rows) {
        if (r.author_id == id) return r;
    }
    REQUIRE(false);
    return rows.front();
}

} // namespace

TEST_CASE("directional counts reproduce the documented example row") {
    // mentions (20,102,65), rt (4,43,28), rp (9,46,39), rq (1,10,1) -> activity 368
    const std::array<int, 12> dir = {20, 102, 65, 4, 43, 28, 9, 46, 39, 1, 10, 1};
    auto rows = features_of(corpus_for(dir));
    const auto& r = row_of(rows, 1);
    CHECK(r.mentions_a_in == 20);
    CHECK(r.mentions_a_out == 102);
    CHECK(r.mentions_de_in == 65);
    CHECK(r.rt_a_in == 4);
    CHECK(r.rt_a_out == 43);
    CHECK(r.rt_de_in == 28);
    CHECK(r.rp_a_in == 9);
    CHECK(r.rp_a_out == 46);
    CHECK(r.rp_de_in == 39);
    CHECK(r.rq_a_in == 1);
    CHECK(r.rq_a_out == 10);
    CHECK(r.rq_de_in == 1);
    CHECK(r.activity == 368);
}

TEST_CASE("activity is the sum of the twelve directional columns") {
    // The four reconstructable rows in the published example table.
    const std::array<std::array<int, 12>, 4> cases = {{
        {0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0},          // 2
        {15, 29, 5, 11, 16, 4, 4, 10, 2, 0, 2, 2},     // 100
        {37, 130, 3, 30, 122, 2, 4, 8, 2, 5, 10, 1},   // 354
        {20, 102, 65, 4, 43, 28, 9, 46, 39, 1, 10, 1}, // 368
    }};
    const int expected[4] = {2, 100, 354, 368};
    for (size_t c = 0; c < cases.size(); ++c) {
        auto rows = features_of(corpus_for(cases[c]));
        CHECK(row_of(rows, 1).activity == expected[c]);
    }
}

TEST_CASE("a user with no interactions yields an all-zero row") {
    auto rows = features_of({tweet(1, 42)});
    const auto& r = row_of(rows, 42);
    for (size_t i = 9; i < 21; ++i) CHECK(r.quantitative(i) == 0);
    CHECK(r.activity == 0);
    CHECK(r.cant_tweets_sample == 1);
}

TEST_CASE("public metric sums and profile join") {
    TweetRecord a = tweet(1, 5);
    a.retweet_count = 10;
    a.reply_count = 3;
    a.like_count = 7;
    a.quote_count = 2;
    TweetRecord b = tweet(2, 5);
    b.retweet_count = 1;
    b.reply_count = 1;
    b.like_count = 1;
    b.quote_count = 1;

    UserRecord u;
    u.author_id = 5;
    u.username = "panauser";
    u.followers = 100;
    u.following = 50;
    u.tweet_count = 2000;
    u.listed_count = 3;
    u.location = "Panamá";
    u.description = "desc";

    auto rows = features_of({a, b}, {u});
    const auto& r = row_of(rows, 5);
    CHECK(r.cant_tweets_sample == 2);
    CHECK(r.rt == 11);
    CHECK(r.vreplies == 4);
    CHECK(r.likes == 8);
    CHECK(r.rquotes == 3);
    CHECK(r.followers == 100);
    CHECK(r.username == "panauser");
    CHECK(r.profile_link == "https://twitter.com/panauser");
    CHECK(r.location == "Panamá");
}

TEST_CASE("self-interactions are excluded from the directional counts") {
    TweetRecord selfmention = tweet(1, 7);
    selfmention.mentions = {7};
    TweetRecord selfrt = tweet(2, 7);
    selfrt.ref_type = RefType::retweeted;
    selfrt.ref_tweet_id = 1;
    auto rows = features_of({selfmention, selfrt});
    const auto& r = row_of(rows, 7);
    CHECK(r.activity == 0);
    CHECK(r.mentions_a_in == 0);
    CHECK(r.mentions_de_in == 0);
    CHECK(r.rt_a_in == 0);
}

TEST_CASE("unresolved references are excluded from features") {
    TweetRecord t = tweet(1, 9);
    t.ref_type = RefType::quoted;
    t.ref_tweet_id = 12345; // unknown tweet, no ref_author_id
    auto rows = features_of({t});
    CHECK(row_of(rows, 9).rq_a_in == 0);
    CHECK(row_of(rows, 9).rq_a_out == 0);
    CHECK(row_of(rows, 9).activity == 0);
}

namespace {

std::vector<TweetRecord> random_corpus(uint64_t seed, size_t n_tweets, size_t n_users) {
    Rng rng(seed);
    std::vector<TweetRecord> tweets;
    for (TweetId id = 1; id <= n_tweets; ++id) {
        TweetRecord t = tweet(id, 1 + rng.bounded(n_users));
        t.retweet_count = static_cast<int64_t>(rng.bounded(1000));
        t.reply_count = static_cast<int64_t>(rng.bounded(100));
        t.like_count = static_cast<int64_t>(rng.bounded(5000));
        t.quote_count = static_cast<int64_t>(rng.bounded(50));
        const size_t mentions = rng.bounded(3);
        for (size_t m = 0; m < mentions; ++m) {
            t.mentions.push_back(1 + rng.bounded(n_users + 20)); // some ids outside the corpus
        }
        switch (rng.bounded(5)) {
        case 1:
            t.ref_type = RefType::retweeted;
            t.ref_tweet_id = 1 + rng.bounded(n_tweets + 50);
            if (rng.bounded(2)) t.ref_author_id = 1 + rng.bounded(n_users + 20);
            break;
        case 2:
            t.ref_type = RefType::replied_to;
            t.ref_tweet_id = 1 + rng.bounded(n_tweets + 50);
            if (rng.bounded(2)) t.in_reply_to_user_id = 1 + rng.bounded(n_users + 20);
            break;
        case 3:
            t.ref_type = RefType::quoted;
            t.ref_tweet_id = 1 + rng.bounded(n_tweets + 50);
            break;
        default: break;
        }
        tweets.push_back(std::move(t));
    }
    return tweets;
}

} // namespace

TEST_CASE("every column matches the naive recount oracle") {
    for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        auto tweets = random_corpus(seed, seed == 1 ? 20 : 2000, seed == 1 ? 5 : 60);
        auto rows = features_of(tweets);
        auto expected = oracle::recount_features(tweets);
        REQUIRE(rows.size() == expected.size());
        for (const auto& r : rows) {
            const auto& e = expected.at(r.author_id);
            CHECK(r.cant_tweets_sample == e.cant);
            CHECK(r.rt == e.rt);
            CHECK(r.vreplies == e.vreplies);
            CHECK(r.likes == e.likes);
            CHECK(r.rquotes == e.rquotes);
            for (size_t i = 0; i < 12; ++i) {
                CHECK(r.quantitative(9 + i) == e.dir[i]);
            }
            CHECK(r.activity == e.activity());
        }
    }
}

TEST_CASE("in-group interactions balance: sum a_In equals sum de_In per action") {
    auto tweets = random_corpus(99, 3000, 40);
    auto rows = features_of(tweets);
    for (int action = 0; action < 4; ++action) {
        int64_t a_in = 0, de_in = 0;
        for (const auto& r : rows) {
            a_in += r.quantitative(9 + static_cast<size_t>(action) * 3);
            de_in += r.quantitative(9 + static_cast<size_t>(action) * 3 + 2);
        }
        CHECK(a_in == de_in);
    }
}

TEST_CASE("feature computation is order-independent") {
    auto tweets = random_corpus(5, 500, 20);
    auto rows1 = features_of(tweets);
    Rng rng(8);
    rng.shuffle(tweets);
    auto rows2 = features_of(tweets);
    REQUIRE(rows1.size() == rows2.size());
    for (size_t i = 0; i < rows1.size(); ++i) {
        CHECK(rows1[i].author_id == rows2[i].author_id);
        for (size_t c = 0; c < kNumQuantitative; ++c) {
            CHECK(rows1[i].quantitative(c) == rows2[i].quantitative(c));
        }
    }
}
