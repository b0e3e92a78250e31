#pragma once

#include <json.hpp>

#include "natforest/records.hpp"

namespace natforest {

// Maps a raw v2 tweet object onto a TweetRecord. Throws DataError on
// malformed input.
TweetRecord tweet_from_json(const nlohmann::json& j);

} // namespace natforest
