#include "natforest/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "natforest/rng.hpp"
#include "natforest/timeutil.hpp"

namespace natforest {

namespace {

constexpr int64_t kEpochStart = 1609459200; // 2021-01-01T00:00:00Z
constexpr UserId kFirstUserId = 10001;
constexpr UserId kFirstOutUserId = 9000001;
constexpr TweetId kFirstOutTweetId = 500000001;

const char* kSources[] = {"Twitter for Android", "Twitter for iPhone", "Twitter Web App",
                          "Instagram"};

// (action index, column offsets): mentions 0, rt 1, rp 2, rq 3; ledger slots
// a_In = 3*a, a_Out = 3*a+1, de_In = 3*a+2.
enum Action { kMention = 0, kRetweet = 1, kReply = 2, kQuote = 3 };

ActionRates rates_for(const GroupRates& g, int action) {
    switch (action) {
    case kMention: return g.mention;
    case kRetweet: return g.retweet;
    case kReply: return g.reply;
    default: return g.quote;
    }
}

} // namespace

SynthCorpus generate_corpus(const SynthConfig& config) {
    if (config.n_users < 1) throw std::invalid_argument("synth: n_users must be >= 1");
    if (config.national_fraction < 0.0 || config.national_fraction > 1.0) {
        throw std::invalid_argument("synth: national_fraction must be in [0, 1]");
    }
    if (config.tweets_dispersion <= 0.0) {
        throw std::invalid_argument("synth: tweets_dispersion must be > 0");
    }

    Rng rng(config.seed);
    const size_t n = static_cast<size_t>(config.n_users);

    SynthCorpus corpus;
    corpus.users.reserve(n);
    corpus.truth.reserve(n);
    corpus.ledger.assign(n, {});

    std::vector<int> label(n);
    std::vector<size_t> class_members[2];
    for (size_t i = 0; i < n; ++i) {
        label[i] = rng.unit() < config.national_fraction ? 1 : 0;
        class_members[static_cast<size_t>(label[i])].push_back(i);
    }

    // Profiles. Follower counts get a Pareto tail; the rest are mild counts.
    for (size_t i = 0; i < n; ++i) {
        UserRecord u;
        u.author_id = kFirstUserId + i;
        u.username = "user" + std::to_string(u.author_id);
        u.created_at = kEpochStart - static_cast<int64_t>(rng.bounded(3650)) * 86400;
        u.verified = rng.unit() < 0.02;
        const double tail = std::pow(1.0 - rng.unit(), -1.0 / config.follower_alpha);
        u.followers = static_cast<int64_t>(10.0 * tail);
        u.following = static_cast<int64_t>(rng.neg_binomial(200.0, 1.0));
        u.listed_count = static_cast<int64_t>(rng.poisson(1.0));
        u.tweet_count = 0; // raised below once the sample tweets exist
        corpus.users.push_back(std::move(u));
        corpus.truth.push_back({kFirstUserId + i, label[i]});
    }

    // Pass 1: base tweets. Every user authors at least one, so usersIN covers
    // the whole population and truth.csv joins exactly.
    TweetId next_tweet = 1;
    std::vector<TweetId> first_tweet(n);
    auto new_tweet = [&](size_t user) {
        TweetRecord t;
        t.tweet_id = next_tweet++;
        t.author_id = kFirstUserId + user;
        t.created_at = kEpochStart + static_cast<int64_t>(t.tweet_id) * 7;
        t.lang = "es";
        t.source = kSources[rng.bounded(4)];
        t.text = "t" + std::to_string(t.tweet_id);
        t.retweet_count = static_cast<int64_t>(rng.neg_binomial(config.public_metric_mean, 0.7));
        t.reply_count = static_cast<int64_t>(rng.neg_binomial(config.public_metric_mean, 0.7));
        t.like_count = static_cast<int64_t>(rng.neg_binomial(config.public_metric_mean, 0.7));
        t.quote_count = static_cast<int64_t>(rng.neg_binomial(config.public_metric_mean, 0.7));
        return t;
    };
    for (size_t i = 0; i < n; ++i) {
        uint64_t count = rng.neg_binomial(config.tweets_mean, config.tweets_dispersion);
        if (count < 1) count = 1;
        for (uint64_t k = 0; k < count; ++k) {
            TweetRecord t = new_tweet(i);
            if (k == 0) first_tweet[i] = t.tweet_id;
            corpus.tweets.push_back(std::move(t));
        }
    }

    // Pass 2: interactions. In-group actions point at a same-class corpus
    // member (never self); out-group actions point at the external pool.
    const size_t out_pool = n / 2;
    TweetId next_out_tweet = kFirstOutTweetId;
    for (size_t i = 0; i < n; ++i) {
        const GroupRates& rates = label[i] == 1 ? config.national : config.other;
        const auto& peers = class_members[static_cast<size_t>(label[i])];
        // class_members is built in ascending index order
        const size_t self_pos = static_cast<size_t>(
            std::lower_bound(peers.begin(), peers.end(), i) - peers.begin());
        for (int action = 0; action < 4; ++action) {
            const ActionRates r = rates_for(rates, action);

            uint64_t c_in = peers.size() > 1 ? rng.neg_binomial(r.lambda_in, 1.0) : 0;
            for (uint64_t k = 0; k < c_in; ++k) {
                size_t pick = static_cast<size_t>(rng.bounded(peers.size() - 1));
                if (pick >= self_pos) ++pick;
                const size_t target = peers[pick];
                TweetRecord t = new_tweet(i);
                if (action == kMention) {
                    t.mentions.push_back(kFirstUserId + target);
                } else {
                    t.ref_type = action == kRetweet ? RefType::retweeted
                                 : action == kReply ? RefType::replied_to
                                                    : RefType::quoted;
                    t.ref_tweet_id = first_tweet[target];
                    if (action == kReply) {
                        t.in_reply_to_user_id = kFirstUserId + target;
                    } else if (action == kRetweet) {
                        t.ref_author_id = kFirstUserId + target;
                    }
                    // quotes carry only the tweet id; the author map resolves them
                }
                corpus.tweets.push_back(std::move(t));
                corpus.ledger[i][static_cast<size_t>(action) * 3] += 1;          // X_a_In
                corpus.ledger[target][static_cast<size_t>(action) * 3 + 2] += 1; // X_de_In
            }

            uint64_t c_out = out_pool > 0 ? rng.neg_binomial(r.lambda_out, 1.0) : 0;
            for (uint64_t k = 0; k < c_out; ++k) {
                const UserId target = kFirstOutUserId + rng.bounded(out_pool);
                TweetRecord t = new_tweet(i);
                if (action == kMention) {
                    t.mentions.push_back(target);
                } else {
                    t.ref_type = action == kRetweet ? RefType::retweeted
                                 : action == kReply ? RefType::replied_to
                                                    : RefType::quoted;
                    t.ref_tweet_id = next_out_tweet++;
                    t.ref_author_id = target; // hydrated: the tweet itself is not in the corpus
                    if (action == kReply) t.in_reply_to_user_id = target;
                }
                corpus.tweets.push_back(std::move(t));
                corpus.ledger[i][static_cast<size_t>(action) * 3 + 1] += 1; // X_a_Out
            }
        }
    }

    // Profile tweet_count covers at least the sampled tweets.
    std::unordered_map<UserId, int64_t> sampled;
    for (const auto& t : corpus.tweets) ++sampled[t.author_id];
    for (auto& u : corpus.users) {
        u.tweet_count = sampled[u.author_id] + static_cast<int64_t>(rng.poisson(50.0));
    }
    return corpus;
}

void write_synth_corpus(const std::string& dir, const SynthCorpus& corpus) {
    std::filesystem::create_directories(dir);
    write_tweets_csv(dir + "/tweets.csv", corpus.tweets);
    write_users_csv(dir + "/users.csv", corpus.users);
    write_truth_csv(dir + "/truth.csv", corpus.truth);
}

namespace {

struct KeyBinding {
    const char* key;
    double* value;
};

std::vector<KeyBinding> rate_bindings(SynthConfig& c) {
    return {
        {"nat_mention_in", &c.national.mention.lambda_in},
        {"nat_mention_out", &c.national.mention.lambda_out},
        {"nat_retweet_in", &c.national.retweet.lambda_in},
        {"nat_retweet_out", &c.national.retweet.lambda_out},
        {"nat_reply_in", &c.national.reply.lambda_in},
        {"nat_reply_out", &c.national.reply.lambda_out},
        {"nat_quote_in", &c.national.quote.lambda_in},
        {"nat_quote_out", &c.national.quote.lambda_out},
        {"oth_mention_in", &c.other.mention.lambda_in},
        {"oth_mention_out", &c.other.mention.lambda_out},
        {"oth_retweet_in", &c.other.retweet.lambda_in},
        {"oth_retweet_out", &c.other.retweet.lambda_out},
        {"oth_reply_in", &c.other.reply.lambda_in},
        {"oth_reply_out", &c.other.reply.lambda_out},
        {"oth_quote_in", &c.other.quote.lambda_in},
        {"oth_quote_out", &c.other.quote.lambda_out},
        {"tweets_mean", &c.tweets_mean},
        {"tweets_dispersion", &c.tweets_dispersion},
        {"public_metric_mean", &c.public_metric_mean},
        {"follower_alpha", &c.follower_alpha},
        {"national_fraction", &c.national_fraction},
    };
}

} // namespace

SynthConfig load_synth_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open");
    SynthConfig config;
    auto bindings = rate_bindings(config);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw DataError(path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "n_users") {
            config.n_users = std::stoi(value);
            continue;
        }
        if (key == "seed") {
            config.seed = std::stoull(value);
            continue;
        }
        bool found = false;
        for (auto& b : bindings) {
            if (key == b.key) {
                *b.value = std::stod(value);
                found = true;
                break;
            }
        }
        if (!found) {
            throw DataError(path + ":" + std::to_string(lineno) + ": unknown key " + key);
        }
    }
    return config;
}

void save_synth_config(const std::string& path, const SynthConfig& config) {
    std::ofstream out(path);
    if (!out) throw DataError(path + ": cannot create");
    SynthConfig copy = config;
    out << "n_users=" << config.n_users << "\n";
    out << "seed=" << config.seed << "\n";
    for (const auto& b : rate_bindings(copy)) {
        out << b.key << "=" << *b.value << "\n";
    }
}

} // namespace natforest
