// natforest: country-trait classification pipeline over tweet archives.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "natforest/acquire.hpp"
#include "natforest/archive.hpp"
#include "natforest/classify.hpp"
#include "natforest/features.hpp"
#include "natforest/forest.hpp"
#include "natforest/ingest.hpp"
#include "natforest/labeling.hpp"
#include "natforest/sampling.hpp"
#include "natforest/search.hpp"
#include "natforest/synth.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitPartial = 3;

using namespace natforest;

struct Args {
    // acquire
    std::string endpoint;
    std::string country, lang;
    std::string users_file;
    std::string start_time = "2021-01-01T00:00:00Z";
    std::string end_time = "2021-03-31T00:00:00Z";
    int max_results = 500;
    int budget_requests = 300;
    int budget_window_secs = 900;

    // shared paths
    std::string tweets_path, users_path, corpus_dir, features_path, labels_path;
    std::string results_path, model_path, champion_path, sample_path, out_path;
    std::vector<std::string> annotation_files;

    // knobs
    uint64_t seed = 123;
    int workers = 0;
    uint32_t stride = 1;
    int fp_max = 1;
    size_t top_k = 20;
    size_t sample_n = 0;
    double confidence = 0.95;
    double error_margin = 0.05;
    std::string annotator;
    size_t tweets_shown = 10;
    bool train_split_only = false;
    std::string class1_path, save_model_path, report_path;
    std::vector<std::string> before_args, after_args;
    std::string synth_config_path;
};

void print_parse_report(const char* what, const ParseReport& report) {
    std::fprintf(stderr, "%s: %zu rows read, %zu accepted, %zu rejected\n", what,
                 report.rows_read, report.rows_accepted, report.rejects.size());
    size_t shown = 0;
    for (const auto& r : report.rejects) {
        if (++shown > 20) {
            std::fprintf(stderr, "  ... %zu more\n", report.rejects.size() - 20);
            break;
        }
        std::fprintf(stderr, "  line %zu: %s\n", r.line, r.reason.c_str());
    }
}

std::vector<std::string> read_roster(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open");
    std::vector<std::string> users;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) users.push_back(line);
    }
    return users;
}

int run_acquire(const Args& args) {
    if (args.endpoint.empty()) {
        std::fprintf(stderr, "acquire: --endpoint is required\n");
        return kExitUsage;
    }
    RateBudget budget(args.budget_requests, static_cast<int64_t>(args.budget_window_secs) * 1000);
    ArchiveSink sink(args.out_path);
    SystemClock clock;

    std::vector<SearchQuery> queries;
    if (!args.users_file.empty()) {
        const auto roster = read_roster(args.users_file);
        if (roster.empty()) throw DataError(args.users_file + ": empty roster");
        for (auto& batch : build_batches(roster, 40)) {
            SearchQuery q;
            q.from_users = batch;
            q.start_time = args.start_time;
            q.end_time = args.end_time;
            q.max_results = args.max_results;
            queries.push_back(std::move(q));
        }
    } else {
        SearchQuery q;
        q.country = args.country;
        q.lang = args.lang;
        q.start_time = args.start_time;
        q.end_time = args.end_time;
        q.max_results = args.max_results;
        queries.push_back(std::move(q));
    }
    for (const auto& q : queries) q.validate(); // bad flags are a usage error

    size_t total = 0, requests = 0, malformed = 0;
    for (size_t i = 0; i < queries.size(); ++i) {
        AcquireResult result = acquire(queries[i], args.endpoint, budget, sink, clock);
        total = result.tweets_written;
        requests += result.requests_made;
        malformed += result.malformed_records;
        if (!result.complete) {
            std::fprintf(stderr,
                         "acquire: interrupted on batch %zu/%zu after %zu tweets: %s\n", i + 1,
                         queries.size(), total, result.error.c_str());
            return kExitPartial;
        }
    }
    std::printf("acquired %zu tweets in %zu requests (%zu malformed records skipped) -> %s\n",
                total, requests, malformed, args.out_path.c_str());
    return kExitOk;
}

int run_ingest(const Args& args) {
    ParseReport tweet_report, user_report;
    auto tweets = parse_archive(args.tweets_path, tweet_report);
    auto users = read_users_csv(args.users_path, user_report);
    write_corpus(args.out_path, tweets, users);
    print_parse_report("tweets", tweet_report);
    print_parse_report("users", user_report);

    const auto users_in = extract_users(tweets);
    EdgeReport edge_report;
    const auto edges = extract_edges(tweets, build_author_map(tweets), &edge_report);
    std::printf("corpus: %zu tweets, %zu usersIN, %zu mention edges, %zu reference edges "
                "(%zu unresolved) -> %s\n",
                tweets.size(), users_in.size(), edge_report.mention_edges,
                edge_report.reference_edges, edge_report.unresolved, args.out_path.c_str());
    return kExitOk;
}

int run_features(const Args& args) {
    Corpus corpus = load_corpus(args.corpus_dir);
    const auto users_in = extract_users(corpus.tweets);
    EdgeReport edge_report;
    const auto edges = extract_edges(corpus.tweets, build_author_map(corpus.tweets), &edge_report);
    auto rows = compute_features(corpus.tweets, edges, users_in, corpus.users);
    write_features_csv(args.out_path, rows);
    std::printf("features: %zu users (%zu unresolved references excluded) -> %s\n", rows.size(),
                edge_report.unresolved, args.out_path.c_str());
    return kExitOk;
}

int run_sample(const Args& args) {
    ParseReport report;
    auto rows = read_features_csv(args.features_path, report);
    size_t n = args.sample_n;
    if (n == 0) {
        const auto plan = required_sample_size(0.5, args.confidence, args.error_margin);
        n = static_cast<size_t>(plan.n);
        std::printf("sample size for p=0.5, confidence %.2f, error %.2f: %zu\n", args.confidence,
                    args.error_margin, n);
    }
    auto sample = draw_sample(rows, n, args.seed);
    write_features_csv(args.out_path, sample);
    std::printf("sampled %zu of %zu rows (seed %llu) -> %s\n", sample.size(), rows.size(),
                static_cast<unsigned long long>(args.seed), args.out_path.c_str());
    return kExitOk;
}

int run_label(const Args& args) {
    ParseReport report;
    auto sample = read_features_csv(args.sample_path, report);
    Corpus corpus = load_corpus(args.corpus_dir);
    SessionOptions options;
    options.annotator = args.annotator;
    options.out_path = args.out_path.empty() ? "labels_" + args.annotator + ".csv"
                                             : args.out_path;
    options.tweets_shown = args.tweets_shown;
    const auto result = run_label_session(sample, corpus.tweets, std::cin, std::cout, options);
    std::printf("\nsession: %zu annotated, %zu skipped, %zu already done%s -> %s\n",
                result.annotated, result.skipped, result.already_done,
                result.quit_early ? " (quit early)" : "", options.out_path.c_str());
    return kExitOk;
}

int run_adjudicate(const Args& args) {
    std::vector<std::vector<Annotation>> files;
    for (const auto& path : args.annotation_files) {
        files.push_back(read_annotations_csv(path));
    }
    auto labels = adjudicate(files);
    size_t unresolved = 0;
    for (const auto& l : labels) {
        if (!l.label) {
            ++unresolved;
            std::fprintf(stderr, "unresolved tie for author %llu (%d vs %d)\n",
                         static_cast<unsigned long long>(l.author_id), l.votes_for_1,
                         l.votes_for_0);
        }
    }
    write_adjudicated_csv(args.out_path, labels);
    std::printf("adjudicated %zu users (%zu unresolved, left out) -> %s\n", labels.size(),
                unresolved, args.out_path.c_str());
    return kExitOk;
}

int run_search_cmd(const Args& args) {
    ParseReport report;
    auto rows = read_features_csv(args.features_path, report);
    auto labels = read_labels_csv(args.labels_path);
    LabeledSample sample = join_labels(rows, labels);

    SearchOptions options;
    options.base_seed = args.seed;
    options.workers = args.workers > 0 ? args.workers
                                       : static_cast<int>(std::thread::hardware_concurrency());
    options.stride = args.stride;
    size_t last_percent = 0;
    options.progress = [&last_percent](size_t done, size_t total) {
        const size_t percent = 100 * done / total;
        if (percent > last_percent) {
            last_percent = percent;
            std::fprintf(stderr, "\rsearch: %zu%% (%zu/%zu cells)", percent, done, total);
            if (done == total) std::fprintf(stderr, "\n");
        }
    };

    auto results = run_search(sample, options);
    write_results_csv(args.out_path, results);
    std::printf("search: %zu cells over %zu labeled rows -> %s\n", results.size(), sample.size(),
                args.out_path.c_str());
    return kExitOk;
}

int run_select(const Args& args) {
    auto rows = read_results_csv(args.results_path);
    auto picked = select_model(rows, args.fp_max, args.top_k);
    if (picked.empty()) {
        std::printf("no rows with FP <= %d; relax --fp-max\n", args.fp_max);
        return kExitOk;
    }
    std::printf("%-8s %4s %4s %4s %4s %10s %-8s %-19s %s\n", "num", "TN", "FP", "FN", "TP",
                "precision", "crit", "class_weight", "columns");
    for (const auto& r : picked) {
        auto prec = precision(r.tp, r.fp);
        char prec_buf[16];
        if (prec) {
            std::snprintf(prec_buf, sizeof(prec_buf), "%.4f", *prec);
        } else {
            std::snprintf(prec_buf, sizeof(prec_buf), "n/a");
        }
        std::vector<bool> removed(kNumQuantitative, false);
        for (int c : r.removed_cols) removed[static_cast<size_t>(c)] = true;
        std::string cols;
        for (size_t i = 0; i < kNumQuantitative; ++i) {
            if (removed[i]) continue;
            if (!cols.empty()) cols += ",";
            cols += kQuantitativeColumns[i];
        }
        std::printf("%-8u %4d %4d %4d %4d %10s %-8s %-19s %s\n", r.num, r.tn, r.fp, r.fn, r.tp,
                    prec_buf, to_string(r.criterion), to_string(r.class_weight), cols.c_str());
    }
    if (!args.champion_path.empty()) {
        const ChampionSpec champion = champion_from_row(picked.front(), args.seed);
        write_champion(args.champion_path, champion);
        std::printf("champion (num %u) -> %s\n", picked.front().num, args.champion_path.c_str());
    }
    return kExitOk;
}

int run_classify(const Args& args) {
    ParseReport report;
    auto rows = read_features_csv(args.features_path, report);

    TrainedForest forest;
    if (!args.model_path.empty()) {
        forest = load_model(args.model_path);
    } else if (!args.champion_path.empty() && !args.labels_path.empty()) {
        const ChampionSpec champion = read_champion(args.champion_path);
        auto labels = read_labels_csv(args.labels_path);
        forest = train_final(rows, labels, champion, args.train_split_only);
        std::printf("trained champion (row %llu) on %zu labels%s\n",
                    static_cast<unsigned long long>(champion.provenance_num), labels.size(),
                    args.train_split_only ? " (train split only)" : "");
    } else {
        std::fprintf(stderr, "classify: need --model, or --champion plus --labels\n");
        return kExitUsage;
    }
    if (!args.save_model_path.empty()) save_model(args.save_model_path, forest);

    const int workers = args.workers > 0 ? args.workers
                                         : static_cast<int>(std::thread::hardware_concurrency());
    classify_population(forest, rows, workers);
    write_features_csv(args.out_path, rows);

    size_t positives = 0;
    for (const auto& r : rows) {
        if (r.pred && *r.pred == 1) ++positives;
    }
    std::printf("classified %zu rows: %zu class 1, %zu class 0 -> %s\n", rows.size(), positives,
                rows.size() - positives, args.out_path.c_str());

    const auto diag = follower_diagnostic(rows);
    if (diag.top_decile_size > 0) {
        std::printf("top-decile followers (>= %lld): %zu/%zu predicted class 1\n",
                    static_cast<long long>(diag.follower_floor), diag.top_decile_class1,
                    diag.top_decile_size);
    }

    if (!args.class1_path.empty()) {
        auto subset = extract_class1(rows);
        write_features_csv(args.class1_path, subset);
        if (subset.empty()) {
            std::fprintf(stderr, "note: no rows were classified 1\n");
        }
        std::printf("class-1 subset: %zu rows -> %s\n", subset.size(), args.class1_path.c_str());
    }
    return kExitOk;
}

DatasetCount parse_dataset_count(const std::string& arg) {
    // name=k/n or name=k/n/population
    const auto eq = arg.find('=');
    const auto slash = arg.find('/', eq);
    if (eq == std::string::npos || slash == std::string::npos) {
        throw CLI::ValidationError("--before/--after", "expected name=k/n[/population]");
    }
    DatasetCount count;
    count.name = arg.substr(0, eq);
    try {
        count.successes = std::stoll(arg.substr(eq + 1, slash - eq - 1));
        const auto rest = arg.substr(slash + 1);
        const auto slash2 = rest.find('/');
        if (slash2 == std::string::npos) {
            count.sample_size = std::stoll(rest);
        } else {
            count.sample_size = std::stoll(rest.substr(0, slash2));
            count.population = std::stoll(rest.substr(slash2 + 1));
        }
    } catch (const std::exception&) {
        throw CLI::ValidationError("--before/--after", "expected name=k/n[/population]");
    }
    return count;
}

int run_report(const Args& args) {
    std::vector<DatasetCount> before, after;
    for (const auto& a : args.before_args) before.push_back(parse_dataset_count(a));
    for (const auto& a : args.after_args) after.push_back(parse_dataset_count(a));
    const EvalReport report = build_report(before, after);
    const std::string text = format_report(report);
    if (!args.out_path.empty()) {
        std::ofstream out(args.out_path);
        if (!out) throw DataError(args.out_path + ": cannot create");
        out << text;
    }
    std::fputs(text.c_str(), stdout);
    return kExitOk;
}

int run_report_sources(const Args& args) {
    ParseReport report;
    auto tweets = parse_archive(args.tweets_path, report);
    auto shares = report_sources(tweets);
    std::printf("%-40s %10s %8s\n", "source", "tweets", "%");
    for (const auto& s : shares) {
        std::printf("%-40s %10zu %7.2f%%\n", s.source.c_str(), s.count, s.percent);
    }
    return kExitOk;
}

int run_synth(const Args& args) {
    SynthConfig config;
    if (!args.synth_config_path.empty()) config = load_synth_config(args.synth_config_path);
    if (args.seed != 123) config.seed = args.seed; // flag overrides the file
    const SynthCorpus corpus = generate_corpus(config);
    write_synth_corpus(args.out_path, corpus);
    size_t nationals = 0;
    for (const auto& t : corpus.truth) nationals += static_cast<size_t>(t.label);
    std::printf("synth: %zu users (%zu national), %zu tweets -> %s\n", corpus.users.size(),
                nationals, corpus.tweets.size(), args.out_path.c_str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"natforest: country-trait classification from interaction counts"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Args args;

    auto* acquire_cmd = app.add_subcommand("acquire", "fetch tweets from a v2-style endpoint");
    acquire_cmd->set_config("--config");
    acquire_cmd->add_option("--endpoint", args.endpoint, "base URL, e.g. http://localhost:8080");
    acquire_cmd->add_option("--country", args.country, "2-letter place_country filter");
    acquire_cmd->add_option("--lang", args.lang, "language tag for the geo query");
    acquire_cmd->add_option("--users-file", args.users_file, "roster of usernames, one per line");
    acquire_cmd->add_option("--start", args.start_time, "ISO-8601 start time");
    acquire_cmd->add_option("--end", args.end_time, "ISO-8601 end time");
    acquire_cmd->add_option("--max-results", args.max_results, "page size (10..500)");
    acquire_cmd->add_option("--budget-requests", args.budget_requests, "requests per window");
    acquire_cmd->add_option("--budget-window-secs", args.budget_window_secs, "window length");
    acquire_cmd->add_option("--out", args.out_path, "archive csv to write")->required();

    auto* ingest_cmd = app.add_subcommand("ingest", "normalize raw archives into a corpus dir");
    ingest_cmd->set_config("--config");
    ingest_cmd->add_option("--tweets", args.tweets_path, "tweets csv or jsonl")->required();
    ingest_cmd->add_option("--users", args.users_path, "users csv")->required();
    ingest_cmd->add_option("--out", args.out_path, "corpus directory")->required();

    auto* features_cmd = app.add_subcommand("features", "compute the 22 quantitative columns");
    features_cmd->set_config("--config");
    features_cmd->add_option("--corpus", args.corpus_dir, "corpus directory")->required();
    features_cmd->add_option("--out", args.out_path, "features csv")->required();

    auto* sample_cmd = app.add_subcommand("sample", "draw a seeded uniform sample");
    sample_cmd->set_config("--config");
    sample_cmd->add_option("--in", args.features_path, "features csv")->required();
    sample_cmd->add_option("--n", args.sample_n, "sample size (0 = compute from confidence/error)");
    sample_cmd->add_option("--confidence", args.confidence, "confidence level");
    sample_cmd->add_option("--error", args.error_margin, "sampling error margin");
    sample_cmd->add_option("--seed", args.seed, "rng seed");
    sample_cmd->add_option("--out", args.out_path, "sample csv")->required();

    auto* label_cmd = app.add_subcommand("label", "interactive annotation session");
    label_cmd->set_config("--config");
    label_cmd->add_option("--sample", args.sample_path, "sample csv")->required();
    label_cmd->add_option("--corpus", args.corpus_dir, "corpus directory")->required();
    label_cmd->add_option("--annotator", args.annotator, "annotator id")->required();
    label_cmd->add_option("--out", args.out_path, "annotations csv (default labels_<id>.csv)");
    label_cmd->add_option("--tweets-shown", args.tweets_shown, "recent tweets displayed");

    auto* adjudicate_cmd = app.add_subcommand("adjudicate", "majority-vote annotation files");
    adjudicate_cmd->set_config("--config");
    adjudicate_cmd->add_option("--in", args.annotation_files, "annotation csv files")
        ->required()
        ->expected(-1);
    adjudicate_cmd->add_option("--out", args.out_path, "labels csv")->required();

    auto* search_cmd = app.add_subcommand("search", "exhaustive combination / parameter sweep");
    search_cmd->set_config("--config");
    search_cmd->add_option("--labels", args.labels_path, "labels csv")->required();
    search_cmd->add_option("--features", args.features_path, "features csv")->required();
    search_cmd->add_option("--seed", args.seed, "base seed (default 123)");
    search_cmd->add_option("--workers", args.workers, "worker threads (default: cores)");
    search_cmd->add_option("--stride", args.stride, "evaluate every k-th cell (testing aid)");
    search_cmd->add_option("--out", args.out_path, "results csv")->required();

    auto* select_cmd = app.add_subcommand("select", "pick champion rows from results");
    select_cmd->set_config("--config");
    select_cmd->add_option("--results", args.results_path, "results csv")->required();
    select_cmd->add_option("--fp-max", args.fp_max, "max false positives (default 1)");
    select_cmd->add_option("--top", args.top_k, "rows to show");
    select_cmd->add_option("--champion-out", args.champion_path, "write top row as champion spec");
    select_cmd->add_option("--seed", args.seed, "seed stored in the champion spec");

    auto* classify_cmd = app.add_subcommand("classify", "auto-label the population");
    classify_cmd->set_config("--config");
    classify_cmd->add_option("--features", args.features_path, "features csv")->required();
    classify_cmd->add_option("--model", args.model_path, "serialized model to load");
    classify_cmd->add_option("--champion", args.champion_path, "champion spec to train");
    classify_cmd->add_option("--labels", args.labels_path, "labels csv (for --champion)");
    classify_cmd->add_flag("--train-split-only", args.train_split_only,
                           "train on the 80% split instead of the full sample");
    classify_cmd->add_option("--save-model", args.save_model_path, "persist the trained model");
    classify_cmd->add_option("--out", args.out_path, "classified csv")->required();
    classify_cmd->add_option("--class1-out", args.class1_path, "write the pred=1 subset");
    classify_cmd->add_option("--workers", args.workers, "worker threads");
    classify_cmd->add_option("--seed", args.seed, "unused when loading a model");

    auto* report_cmd = app.add_subcommand("report", "before/after purity report");
    report_cmd->set_config("--config");
    report_cmd->add_option("--before", args.before_args, "name=k/n[/population]")
        ->required()
        ->expected(-1);
    report_cmd->add_option("--after", args.after_args, "name=k/n[/population]")
        ->required()
        ->expected(-1);
    report_cmd->add_option("--out", args.out_path, "also write the report here");

    auto* sources_cmd = app.add_subcommand("report-sources", "tweet counts by source device");
    sources_cmd->set_config("--config");
    sources_cmd->add_option("--tweets", args.tweets_path, "tweets csv")->required();

    auto* synth_cmd = app.add_subcommand("synth", "generate a ground-truth synthetic corpus");
    synth_cmd->add_option("--config", args.synth_config_path, "synth key=value config");
    synth_cmd->add_option("--seed", args.seed, "override the config seed");
    synth_cmd->add_option("--out", args.out_path, "output directory")->required();

    for (auto* sub : app.get_subcommands({})) sub->set_version_flag("--version", kVersion);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (acquire_cmd->parsed()) return run_acquire(args);
        if (ingest_cmd->parsed()) return run_ingest(args);
        if (features_cmd->parsed()) return run_features(args);
        if (sample_cmd->parsed()) return run_sample(args);
        if (label_cmd->parsed()) return run_label(args);
        if (adjudicate_cmd->parsed()) return run_adjudicate(args);
        if (search_cmd->parsed()) return run_search_cmd(args);
        if (select_cmd->parsed()) return run_select(args);
        if (classify_cmd->parsed()) return run_classify(args);
        if (report_cmd->parsed()) return run_report(args);
        if (sources_cmd->parsed()) return run_report_sources(args);
        if (synth_cmd->parsed()) return run_synth(args);
    } catch (const InvalidQueryError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return kExitUsage;
}
