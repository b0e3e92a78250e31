#include "natforest/labeling.hpp"

#include <algorithm>
#include <charconv>
#include <ctime>
#include <fstream>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "natforest/archive.hpp"
#include "natforest/csv.hpp"
#include "natforest/timeutil.hpp"

namespace natforest {

namespace {

const std::vector<std::string> kAnnotationColumns = {"author_id", "annotator", "label",
                                                     "noted_at"};

bool parse_u64(const std::string& s, uint64_t& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::string wall_clock_now() {
    return format_iso8601(static_cast<int64_t>(std::time(nullptr)));
}

} // namespace

void write_annotations_csv(const std::string& path, const std::vector<Annotation>& annotations) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path + ": cannot create");
    csv_write_row(out, kAnnotationColumns);
    for (const auto& a : annotations) {
        csv_write_row(out, {std::to_string(a.author_id), a.annotator, std::to_string(a.label),
                            a.noted_at});
    }
}

std::vector<Annotation> read_annotations_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path + ": cannot open");
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields) || fields != kAnnotationColumns) {
        throw DataError(path + ": corrupted annotations file (bad header)");
    }
    std::vector<Annotation> out;
    while (reader.next(fields)) {
        Annotation a;
        if (fields.size() != 4 || !parse_u64(fields[0], a.author_id) ||
            (fields[2] != "0" && fields[2] != "1")) {
            throw DataError(path + ": corrupted annotations file (line " +
                            std::to_string(reader.line()) + ")");
        }
        a.annotator = fields[1];
        a.label = fields[2] == "1" ? 1 : 0;
        a.noted_at = fields[3];
        out.push_back(std::move(a));
    }
    return out;
}

SessionResult run_label_session(const std::vector<UserFeatureRow>& sample,
                                const std::vector<TweetRecord>& corpus_tweets,
                                std::istream& in, std::ostream& out,
                                const SessionOptions& options) {
    // Resume: refuse to start over a file we cannot fully parse.
    std::unordered_set<UserId> done;
    {
        std::ifstream probe(options.out_path);
        if (probe.good()) {
            for (const auto& a : read_annotations_csv(options.out_path)) {
                done.insert(a.author_id);
            }
        }
    }

    std::unordered_map<UserId, std::vector<const TweetRecord*>> by_author;
    for (const auto& t : corpus_tweets) by_author[t.author_id].push_back(&t);
    for (auto& [id, tweets] : by_author) {
        std::sort(tweets.begin(), tweets.end(), [](const TweetRecord* a, const TweetRecord* b) {
            if (a->created_at != b->created_at) return a->created_at > b->created_at;
            return a->tweet_id > b->tweet_id;
        });
    }

    std::ofstream sink;
    bool fresh = done.empty() && !std::ifstream(options.out_path).good();
    sink.open(options.out_path, std::ios::binary | std::ios::app);
    if (!sink) throw DataError(options.out_path + ": cannot open for append");
    if (fresh) csv_write_row(sink, kAnnotationColumns);

    auto now = options.now ? options.now : wall_clock_now;

    SessionResult result;
    for (const auto& row : sample) {
        if (done.count(row.author_id)) {
            ++result.already_done;
            continue;
        }
        out << "\n=== user " << row.author_id << " (" << row.username << ") ===\n";
        out << "location:    " << row.location << "\n";
        out << "description: " << row.description << "\n";
        out << "profile:     " << row.profile_link << "\n";
        auto it = by_author.find(row.author_id);
        if (it != by_author.end()) {
            const size_t shown = std::min(options.tweets_shown, it->second.size());
            out << "recent tweets (" << shown << " of " << it->second.size() << "):\n";
            for (size_t i = 0; i < shown; ++i) {
                const TweetRecord* t = it->second[i];
                out << "  [" << format_iso8601(t->created_at) << "] " << t->text << "\n";
            }
        } else {
            out << "recent tweets: none in corpus\n";
        }

        bool decided = false;
        while (!decided) {
            out << "label? [1=national 0=other/unknown s=skip q=quit] " << std::flush;
            std::string line;
            if (!std::getline(in, line)) {
                result.quit_early = true;
                return result;
            }
            const char key = line.empty() ? ' ' : line[0];
            switch (key) {
            case '1':
            case '0': {
                Annotation a{row.author_id, options.annotator, key == '1' ? 1 : 0, now()};
                csv_write_row(sink, {std::to_string(a.author_id), a.annotator,
                                     std::to_string(a.label), a.noted_at});
                sink.flush();
                ++result.annotated;
                decided = true;
                break;
            }
            case 's':
                ++result.skipped;
                decided = true;
                break;
            case 'q':
                result.quit_early = true;
                return result;
            default:
                out << "unrecognized key\n";
            }
        }
    }
    return result;
}

std::vector<AdjudicatedLabel> adjudicate(const std::vector<std::vector<Annotation>>& votes) {
    std::map<UserId, AdjudicatedLabel> tally;
    for (const auto& file : votes) {
        for (const auto& a : file) {
            auto& entry = tally[a.author_id];
            entry.author_id = a.author_id;
            (a.label == 1 ? entry.votes_for_1 : entry.votes_for_0) += 1;
        }
    }
    std::vector<AdjudicatedLabel> out;
    out.reserve(tally.size());
    for (auto& [id, entry] : tally) {
        if (entry.votes_for_1 > entry.votes_for_0) {
            entry.label = 1;
        } else if (entry.votes_for_0 > entry.votes_for_1) {
            entry.label = 0;
        }
        out.push_back(entry);
    }
    return out;
}

void write_adjudicated_csv(const std::string& path, const std::vector<AdjudicatedLabel>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path + ": cannot create");
    csv_write_row(out, {"author_id", "label", "votes_for_1", "votes_for_0"});
    for (const auto& l : labels) {
        if (!l.label) continue;
        csv_write_row(out, {std::to_string(l.author_id), std::to_string(*l.label),
                            std::to_string(l.votes_for_1), std::to_string(l.votes_for_0)});
    }
}

std::vector<std::pair<UserId, int>> read_labels_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path + ": cannot open");
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields) || fields.size() < 2 || fields[0] != "author_id" ||
        fields[1] != "label") {
        throw DataError(path + ": expected header starting author_id,label");
    }
    std::vector<std::pair<UserId, int>> out;
    while (reader.next(fields)) {
        UserId id;
        if (fields.size() < 2 || !parse_u64(fields[0], id) ||
            (fields[1] != "0" && fields[1] != "1")) {
            throw DataError(path + ": bad label row at line " + std::to_string(reader.line()));
        }
        out.emplace_back(id, fields[1] == "1" ? 1 : 0);
    }
    return out;
}

} // namespace natforest
