#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "natforest/archive.hpp"
#include "natforest/records.hpp"

namespace natforest {

// Per-action interaction rates for one class of user. lambda_in drives
// interactions aimed at same-class corpus members, lambda_out at accounts
// outside the corpus. The gap between the two classes' rates is the
// homophily signal the classifier has to find.
struct ActionRates {
    double lambda_in = 0.0;
    double lambda_out = 0.0;
};

struct GroupRates {
    ActionRates mention;
    ActionRates retweet;
    ActionRates reply;
    ActionRates quote;
};

struct SynthConfig {
    int n_users = 1000;
    double national_fraction = 0.77;
    double tweets_mean = 6.0;       // base tweets per user (at least 1 survives)
    double tweets_dispersion = 1.0; // gamma shape of the overdispersed counts
    GroupRates national{
        {8.0, 1.0},  // mention
        {10.0, 1.0}, // retweet
        {6.0, 1.0},  // reply
        {4.0, 0.5},  // quote
    };
    GroupRates other{
        {1.0, 6.0},
        {1.0, 8.0},
        {1.0, 5.0},
        {0.5, 3.0},
    };
    double public_metric_mean = 2.0; // per-tweet public metric counts
    double follower_alpha = 1.3;     // Pareto tail exponent for followers
    uint64_t seed = 1;
};

// Key=value config file; unknown keys rejected.
SynthConfig load_synth_config(const std::string& path);
void save_synth_config(const std::string& path, const SynthConfig& config);

struct SynthCorpus {
    std::vector<TweetRecord> tweets;
    std::vector<UserRecord> users;
    std::vector<TruthRow> truth;
    // Internal ledger: the expected 12 directional counts per user, in the
    // canonical column order (mentions_a_In .. rq_de_In), keyed by position
    // in `users`. Features recomputed from the archives must match exactly.
    std::vector<std::array<int64_t, 12>> ledger;
};

SynthCorpus generate_corpus(const SynthConfig& config);

// Writes tweets.csv, users.csv and truth.csv under dir.
void write_synth_corpus(const std::string& dir, const SynthCorpus& corpus);

} // namespace natforest
