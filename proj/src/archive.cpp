#include "natforest/archive.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "natforest/csv.hpp"
#include "natforest/timeutil.hpp"
#include "natforest/tweet_json.hpp"

namespace natforest {

const std::vector<std::string> kTweetColumns = {
    "tweet_id",   "author_id",     "created_at", "lang",
    "source",     "text",          "in_reply_to_user_id",
    "ref_type",   "ref_tweet_id",  "ref_author_id",
    "mentions",   "retweet_count", "reply_count",
    "like_count", "quote_count",   "place_country",
};

const std::vector<std::string> kUserColumns = {
    "author_id", "username",  "created_at",  "verified",    "followers",
    "following", "tweet_count", "listed_count", "location", "description",
};

namespace {

std::vector<std::string> feature_columns() {
    std::vector<std::string> cols = {"author_id", "username"};
    for (const char* c : kQuantitativeColumns) cols.emplace_back(c);
    for (const char* c : {"label", "prob0", "prob1", "pred", "location", "description",
                          "profile_link"}) {
        cols.emplace_back(c);
    }
    return cols;
}

} // namespace

const std::vector<std::string> kFeatureColumns = feature_columns();

namespace {

bool parse_u64(const std::string& s, uint64_t& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_i64(const std::string& s, int64_t& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

std::string fmt_prob(double p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.15g", p);
    return buf;
}

void check_header(const std::vector<std::string>& got, const std::vector<std::string>& want,
                  const std::string& path) {
    if (got != want) {
        std::string msg = path + ": bad or missing header; expected ";
        for (size_t i = 0; i < want.size(); ++i) {
            if (i) msg += ",";
            msg += want[i];
        }
        throw DataError(msg);
    }
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path + ": cannot open");
    return in;
}

std::ofstream create_or_throw(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path + ": cannot create");
    return out;
}

} // namespace

// --- tweets.csv -------------------------------------------------------------

void write_tweets_header(std::ostream& out) {
    csv_write_row(out, kTweetColumns);
}

void write_tweet_row(std::ostream& out, const TweetRecord& t) {
    std::vector<std::string> mention_ids;
    mention_ids.reserve(t.mentions.size());
    for (UserId m : t.mentions) mention_ids.push_back(std::to_string(m));
    csv_write_row(out, {
        std::to_string(t.tweet_id),
        std::to_string(t.author_id),
        format_iso8601(t.created_at),
        t.lang,
        t.source,
        t.text,
        t.in_reply_to_user_id ? std::to_string(*t.in_reply_to_user_id) : "",
        t.ref_type == RefType::none ? "" : to_string(t.ref_type),
        t.ref_tweet_id ? std::to_string(*t.ref_tweet_id) : "",
        t.ref_author_id ? std::to_string(*t.ref_author_id) : "",
        join_semicolons(mention_ids),
        std::to_string(t.retweet_count),
        std::to_string(t.reply_count),
        std::to_string(t.like_count),
        std::to_string(t.quote_count),
        t.place_country,
    });
}

void write_tweets_csv(const std::string& path, const std::vector<TweetRecord>& tweets) {
    auto out = create_or_throw(path);
    write_tweets_header(out);
    for (const auto& t : tweets) write_tweet_row(out, t);
}

namespace {

// Returns empty string on success, else the rejection reason.
std::string tweet_from_fields(const std::vector<std::string>& f, TweetRecord& t) {
    if (f.size() != kTweetColumns.size()) return "wrong field count";
    if (!parse_u64(f[0], t.tweet_id)) return "bad tweet_id";
    if (!parse_u64(f[1], t.author_id)) return "bad author_id";
    auto ts = parse_iso8601(f[2]);
    if (!ts) return "bad created_at";
    t.created_at = *ts;
    t.lang = f[3];
    t.source = f[4];
    t.text = f[5];
    if (!f[6].empty()) {
        uint64_t v;
        if (!parse_u64(f[6], v)) return "bad in_reply_to_user_id";
        t.in_reply_to_user_id = v;
    } else {
        t.in_reply_to_user_id.reset();
    }
    auto rt = ref_type_from_string(f[7]);
    if (!rt) return "bad ref_type";
    t.ref_type = *rt;
    if (!f[8].empty()) {
        uint64_t v;
        if (!parse_u64(f[8], v)) return "bad ref_tweet_id";
        t.ref_tweet_id = v;
    } else {
        t.ref_tweet_id.reset();
    }
    if (!f[9].empty()) {
        uint64_t v;
        if (!parse_u64(f[9], v)) return "bad ref_author_id";
        t.ref_author_id = v;
    } else {
        t.ref_author_id.reset();
    }
    t.mentions.clear();
    for (const auto& part : split_semicolons(f[10])) {
        uint64_t v;
        if (!parse_u64(part, v)) return "bad mention id";
        t.mentions.push_back(v);
    }
    if (!parse_i64(f[11], t.retweet_count) || t.retweet_count < 0) return "bad retweet_count";
    if (!parse_i64(f[12], t.reply_count) || t.reply_count < 0) return "bad reply_count";
    if (!parse_i64(f[13], t.like_count) || t.like_count < 0) return "bad like_count";
    if (!parse_i64(f[14], t.quote_count) || t.quote_count < 0) return "bad quote_count";
    t.place_country = f[15];

    // ref_type=none <=> ref_tweet_id absent
    if ((t.ref_type == RefType::none) != !t.ref_tweet_id.has_value()) {
        return "ref_type/ref_tweet_id mismatch";
    }
    return "";
}

} // namespace

std::vector<TweetRecord> read_tweets_csv(const std::string& path, ParseReport& report) {
    auto in = open_or_throw(path);
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw DataError(path + ": empty file, missing header");
    check_header(fields, kTweetColumns, path);

    std::vector<TweetRecord> tweets;
    while (reader.next(fields)) {
        ++report.rows_read;
        TweetRecord t;
        std::string err = tweet_from_fields(fields, t);
        if (!err.empty()) {
            report.rejects.push_back({reader.line(), err});
            continue;
        }
        ++report.rows_accepted;
        tweets.push_back(std::move(t));
    }
    return tweets;
}

std::vector<TweetRecord> read_tweets_jsonl(const std::string& path, ParseReport& report) {
    auto in = open_or_throw(path);
    std::vector<TweetRecord> tweets;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ++report.rows_read;
        try {
            tweets.push_back(tweet_from_json(nlohmann::json::parse(line)));
            ++report.rows_accepted;
        } catch (const std::exception& e) {
            report.rejects.push_back({lineno, e.what()});
        }
    }
    return tweets;
}

TweetRecord tweet_from_json(const nlohmann::json& j) {
    TweetRecord t;
    // v2 objects carry ids as strings.
    auto get_id = [](const nlohmann::json& v) -> uint64_t {
        if (v.is_string()) {
            uint64_t out;
            if (!parse_u64(v.get<std::string>(), out)) {
                throw DataError("bad id string: " + v.get<std::string>());
            }
            return out;
        }
        return v.get<uint64_t>();
    };
    t.tweet_id = get_id(j.at("id"));
    t.author_id = get_id(j.at("author_id"));
    auto ts = parse_iso8601(j.at("created_at").get<std::string>());
    if (!ts) throw DataError("bad created_at");
    t.created_at = *ts;
    t.lang = j.value("lang", "");
    t.source = j.value("source", "");
    t.text = j.value("text", "");
    if (j.contains("in_reply_to_user_id")) t.in_reply_to_user_id = get_id(j["in_reply_to_user_id"]);
    if (j.contains("referenced_tweets") && j["referenced_tweets"].is_array() &&
        !j["referenced_tweets"].empty()) {
        const auto& ref = j["referenced_tweets"][0];
        auto rt = ref_type_from_string(ref.at("type").get<std::string>());
        if (!rt) throw DataError("bad referenced_tweets type");
        t.ref_type = *rt;
        t.ref_tweet_id = get_id(ref.at("id"));
        if (ref.contains("author_id")) t.ref_author_id = get_id(ref["author_id"]);
    }
    if (j.contains("entities") && j["entities"].contains("mentions")) {
        for (const auto& m : j["entities"]["mentions"]) {
            if (m.contains("id")) t.mentions.push_back(get_id(m["id"]));
        }
    }
    if (j.contains("public_metrics")) {
        const auto& pm = j["public_metrics"];
        t.retweet_count = pm.value("retweet_count", 0);
        t.reply_count = pm.value("reply_count", 0);
        t.like_count = pm.value("like_count", 0);
        t.quote_count = pm.value("quote_count", 0);
    }
    if (j.contains("geo") && j["geo"].contains("place_country")) {
        t.place_country = j["geo"]["place_country"].get<std::string>();
    } else if (j.contains("place_country")) {
        t.place_country = j["place_country"].get<std::string>();
    }
    if ((t.ref_type == RefType::none) != !t.ref_tweet_id.has_value()) {
        throw DataError("ref_type/ref_tweet_id mismatch");
    }
    return t;
}

// --- users.csv --------------------------------------------------------------

void write_users_csv(const std::string& path, const std::vector<UserRecord>& users) {
    auto out = create_or_throw(path);
    csv_write_row(out, kUserColumns);
    for (const auto& u : users) {
        csv_write_row(out, {
            std::to_string(u.author_id),
            u.username,
            format_iso8601(u.created_at),
            u.verified ? "true" : "false",
            std::to_string(u.followers),
            std::to_string(u.following),
            std::to_string(u.tweet_count),
            std::to_string(u.listed_count),
            u.location,
            u.description,
        });
    }
}

std::vector<UserRecord> read_users_csv(const std::string& path, ParseReport& report) {
    auto in = open_or_throw(path);
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw DataError(path + ": empty file, missing header");
    check_header(fields, kUserColumns, path);

    std::vector<UserRecord> users;
    while (reader.next(fields)) {
        ++report.rows_read;
        if (fields.size() != kUserColumns.size()) {
            report.rejects.push_back({reader.line(), "wrong field count"});
            continue;
        }
        UserRecord u;
        auto ts = parse_iso8601(fields[2]);
        if (!parse_u64(fields[0], u.author_id) || !ts ||
            (fields[3] != "true" && fields[3] != "false") ||
            !parse_i64(fields[4], u.followers) || !parse_i64(fields[5], u.following) ||
            !parse_i64(fields[6], u.tweet_count) || !parse_i64(fields[7], u.listed_count) ||
            u.followers < 0 || u.following < 0 || u.tweet_count < 0 || u.listed_count < 0) {
            report.rejects.push_back({reader.line(), "bad field value"});
            continue;
        }
        u.username = fields[1];
        u.created_at = *ts;
        u.verified = fields[3] == "true";
        u.location = fields[8];
        u.description = fields[9];
        ++report.rows_accepted;
        users.push_back(std::move(u));
    }
    return users;
}

// --- features.csv -----------------------------------------------------------

void write_features_csv(const std::string& path, const std::vector<UserFeatureRow>& rows) {
    auto out = create_or_throw(path);
    csv_write_row(out, kFeatureColumns);
    std::vector<std::string> f;
    for (const auto& r : rows) {
        f.clear();
        f.push_back(std::to_string(r.author_id));
        f.push_back(r.username);
        for (size_t i = 0; i < kNumQuantitative; ++i) f.push_back(std::to_string(r.quantitative(i)));
        f.push_back(r.label ? std::to_string(*r.label) : "");
        f.push_back(r.prob0 ? fmt_prob(*r.prob0) : "");
        f.push_back(r.prob1 ? fmt_prob(*r.prob1) : "");
        f.push_back(r.pred ? std::to_string(*r.pred) : "");
        f.push_back(r.location);
        f.push_back(r.description);
        f.push_back(r.profile_link);
        csv_write_row(out, f);
    }
}

std::vector<UserFeatureRow> read_features_csv(const std::string& path, ParseReport& report) {
    auto in = open_or_throw(path);
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw DataError(path + ": empty file, missing header");
    check_header(fields, kFeatureColumns, path);

    std::vector<UserFeatureRow> rows;
    while (reader.next(fields)) {
        ++report.rows_read;
        if (fields.size() != kFeatureColumns.size()) {
            report.rejects.push_back({reader.line(), "wrong field count"});
            continue;
        }
        UserFeatureRow r;
        bool ok = parse_u64(fields[0], r.author_id);
        r.username = fields[1];
        for (size_t i = 0; ok && i < kNumQuantitative; ++i) {
            int64_t v;
            ok = parse_i64(fields[2 + i], v) && v >= 0;
            if (ok) r.quantitative(i) = v;
        }
        size_t base = 2 + kNumQuantitative;
        if (ok && !fields[base].empty()) {
            int64_t v;
            ok = parse_i64(fields[base], v) && (v == 0 || v == 1);
            if (ok) r.label = static_cast<int>(v);
        }
        if (ok && !fields[base + 1].empty()) {
            double v;
            ok = parse_double(fields[base + 1], v);
            if (ok) r.prob0 = v;
        }
        if (ok && !fields[base + 2].empty()) {
            double v;
            ok = parse_double(fields[base + 2], v);
            if (ok) r.prob1 = v;
        }
        if (ok && !fields[base + 3].empty()) {
            int64_t v;
            ok = parse_i64(fields[base + 3], v) && (v == 0 || v == 1);
            if (ok) r.pred = static_cast<int>(v);
        }
        if (!ok) {
            report.rejects.push_back({reader.line(), "bad field value"});
            continue;
        }
        r.location = fields[base + 4];
        r.description = fields[base + 5];
        r.profile_link = fields[base + 6];
        ++report.rows_accepted;
        rows.push_back(std::move(r));
    }
    return rows;
}

// --- truth.csv ---------------------------------------------------------------

void write_truth_csv(const std::string& path, const std::vector<TruthRow>& rows) {
    auto out = create_or_throw(path);
    csv_write_row(out, {"author_id", "label"});
    for (const auto& r : rows) {
        csv_write_row(out, {std::to_string(r.author_id), std::to_string(r.label)});
    }
}

std::vector<TruthRow> read_truth_csv(const std::string& path) {
    auto in = open_or_throw(path);
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw DataError(path + ": empty file, missing header");
    check_header(fields, {"author_id", "label"}, path);
    std::vector<TruthRow> rows;
    while (reader.next(fields)) {
        if (fields.size() != 2) throw DataError(path + ": bad row");
        TruthRow r;
        int64_t v;
        if (!parse_u64(fields[0], r.author_id) || !parse_i64(fields[1], v) ||
            (v != 0 && v != 1)) {
            throw DataError(path + ": bad row");
        }
        r.label = static_cast<int>(v);
        rows.push_back(r);
    }
    return rows;
}

} // namespace natforest
