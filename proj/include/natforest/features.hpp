#pragma once

#include <unordered_set>
#include <vector>

#include "natforest/ingest.hpp"
#include "natforest/records.hpp"

namespace natforest {

// Computes the 22 quantitative columns for every member of usersIN, joined
// with profile data where available. Output sorted by author_id; users with
// no tweets in the corpus get no row (usersIN is defined by authorship), but
// an author with zero interactions still yields an all-zeros row.
std::vector<UserFeatureRow> compute_features(const std::vector<TweetRecord>& tweets,
                                             const std::vector<InteractionEdge>& edges,
                                             const std::unordered_set<UserId>& users_in,
                                             const std::vector<UserRecord>& users);

} // namespace natforest
