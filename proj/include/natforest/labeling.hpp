#pragma once

#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "natforest/records.hpp"

namespace natforest {

struct Annotation {
    UserId author_id = 0;
    std::string annotator;
    int label = 0; // 1 = country trait identified, 0 = other / unidentifiable
    std::string noted_at;
};

struct AdjudicatedLabel {
    UserId author_id = 0;
    std::optional<int> label; // empty = unresolved (tie or no votes)
    int votes_for_1 = 0;
    int votes_for_0 = 0;
};

void write_annotations_csv(const std::string& path, const std::vector<Annotation>& annotations);
// Throws DataError on a corrupted file (the session must refuse to resume).
std::vector<Annotation> read_annotations_csv(const std::string& path);

struct SessionOptions {
    std::string annotator;
    std::string out_path;                 // appended to; also the resume file
    size_t tweets_shown = 10;             // most recent corpus tweets displayed
    std::function<std::string()> now;     // override for tests; defaults to wall clock
};

struct SessionResult {
    size_t annotated = 0;
    size_t skipped = 0;
    size_t already_done = 0;
    bool quit_early = false;
};

// Interactive pass over the sample: shows the profile and the most recent
// tweets, accepts 1 / 0 / s(kip) / q(uit) per user, appends annotations to
// the resume file as it goes.
SessionResult run_label_session(const std::vector<UserFeatureRow>& sample,
                                const std::vector<TweetRecord>& corpus_tweets,
                                std::istream& in, std::ostream& out,
                                const SessionOptions& options);

// Majority vote per user across annotation files; ties stay unresolved.
// Users missing from some files count as abstentions. Output sorted by
// author_id.
std::vector<AdjudicatedLabel> adjudicate(const std::vector<std::vector<Annotation>>& votes);

// Resolved labels only (author_id,label,votes_for_1,votes_for_0).
void write_adjudicated_csv(const std::string& path, const std::vector<AdjudicatedLabel>& labels);

// Reads author_id -> label from an adjudicated labels file. Accepts both the
// 4-column adjudicated layout and a plain author_id,label file.
std::vector<std::pair<UserId, int>> read_labels_csv(const std::string& path);

} // namespace natforest
