#include "natforest/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "natforest/rng.hpp"

namespace natforest {

namespace {

// Gains below this are treated as zero; absorbs accumulation noise on
// mathematically null splits.
constexpr double kMinGain = 1e-12;

} // namespace

const char* to_string(Criterion c) {
    return c == Criterion::gini ? "gini" : "entropy";
}

const char* to_string(ClassWeight w) {
    switch (w) {
    case ClassWeight::none: return "none";
    case ClassWeight::balanced: return "balanced";
    case ClassWeight::balanced_subsample: return "balanced_subsample";
    }
    return "none";
}

std::optional<Criterion> criterion_from_string(const std::string& s) {
    if (s == "gini") return Criterion::gini;
    if (s == "entropy") return Criterion::entropy;
    return std::nullopt;
}

std::optional<ClassWeight> class_weight_from_string(const std::string& s) {
    if (s == "none" || s.empty()) return ClassWeight::none;
    if (s == "balanced") return ClassWeight::balanced;
    if (s == "balanced_subsample") return ClassWeight::balanced_subsample;
    return std::nullopt;
}

void Dataset::validate() const {
    if (columns.size() != feature_names.size()) {
        throw std::invalid_argument("Dataset: columns / feature_names size mismatch");
    }
    for (const auto& col : columns) {
        if (col.size() != labels.size()) {
            throw std::invalid_argument("Dataset: column length != label count");
        }
    }
    if (!sample_weights.empty() && sample_weights.size() != labels.size()) {
        throw std::invalid_argument("Dataset: sample_weights length != label count");
    }
    for (int l : labels) {
        if (l != 0 && l != 1) throw std::invalid_argument("Dataset: labels must be 0/1");
    }
}

double impurity(double weight0, double weight1, Criterion c) {
    const double w = weight0 + weight1;
    if (w <= 0.0) throw std::domain_error("impurity: all-zero class weights");
    const double p0 = weight0 / w;
    const double p1 = weight1 / w;
    if (c == Criterion::gini) {
        return 1.0 - (p0 * p0 + p1 * p1);
    }
    double h = 0.0;
    if (p0 > 0.0) h -= p0 * std::log2(p0);
    if (p1 > 0.0) h -= p1 * std::log2(p1);
    return h;
}

std::array<double, 2> balanced_class_weights(std::span<const int> labels) {
    double n0 = 0, n1 = 0;
    for (int l : labels) (l == 1 ? n1 : n0) += 1.0;
    const double n = n0 + n1;
    std::array<double, 2> w = {0.0, 0.0};
    if (n0 > 0) w[0] = n / (2.0 * n0);
    if (n1 > 0) w[1] = n / (2.0 * n1);
    return w;
}

namespace {

struct NodeEntry {
    uint32_t row;
    int32_t label;
    double weight;
};

struct SortItem {
    double value;
    double weight;
    int32_t label;
};

struct BestCandidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    bool valid = false;
};

// Scans one feature of a node: entries gathered into `items`, sorted, then a
// single sweep over distinct-value boundaries. Gain is the impurity decrease
// relative to the parent node.
void scan_feature(std::vector<SortItem>& items, int feature, double w0_total,
                  double w1_total, double parent_impurity, Criterion crit,
                  BestCandidate& best) {
    std::sort(items.begin(), items.end(),
              [](const SortItem& a, const SortItem& b) { return a.value < b.value; });

    const double w_total = w0_total + w1_total;
    double w0_left = 0.0, w1_left = 0.0;
    for (size_t i = 0; i + 1 < items.size(); ++i) {
        const SortItem& it = items[i];
        if (it.label == 1) {
            w1_left += it.weight;
        } else {
            w0_left += it.weight;
        }
        if (items[i + 1].value <= it.value) continue; // not a distinct boundary
        const double w_left = w0_left + w1_left;
        const double w_right = w_total - w_left;
        if (w_left <= 0.0 || w_right <= 0.0) continue;
        const double imp_left = impurity(w0_left, w1_left, crit);
        const double imp_right = impurity(w0_total - w0_left, w1_total - w1_left, crit);
        const double gain = parent_impurity - (w_left * imp_left + w_right * imp_right) / w_total;
        if (gain > best.gain) {
            best.gain = gain;
            best.feature = feature;
            best.threshold = it.value + (items[i + 1].value - it.value) / 2.0;
            best.valid = true;
        }
    }
}

class TreeBuilder {
public:
    TreeBuilder(const Dataset& ds, Criterion crit, int max_features, int min_samples_split,
                int min_samples_leaf)
        : ds_(ds),
          crit_(crit),
          max_features_(max_features),
          min_samples_split_(min_samples_split),
          min_samples_leaf_(min_samples_leaf),
          feature_scratch_(ds.n_features()) {}

    // entries is consumed (partitioned in place). importances accumulates
    // w_node * gain per feature across calls.
    Tree build(std::vector<NodeEntry>& entries, Rng& rng, std::vector<double>& importances) {
        Tree tree;
        entries_ = &entries;
        importances_ = &importances;
        build_node(0, entries.size(), rng, tree);
        return tree;
    }

private:
    int32_t build_node(size_t begin, size_t end, Rng& rng, Tree& tree) {
        double w0 = 0, w1 = 0;
        for (size_t i = begin; i < end; ++i) {
            const NodeEntry& e = (*entries_)[i];
            (e.label == 1 ? w1 : w0) += e.weight;
        }
        const size_t n = end - begin;
        if (w0 <= 0.0 || w1 <= 0.0 || n < static_cast<size_t>(min_samples_split_)) {
            return make_leaf_with(w0, w1, tree);
        }

        // Sample candidate features without replacement, then order them so a
        // tied gain resolves to the lowest feature index.
        const size_t d = ds_.n_features();
        const size_t k = std::min<size_t>(static_cast<size_t>(max_features_), d);
        for (size_t i = 0; i < d; ++i) feature_scratch_[i] = static_cast<int>(i);
        for (size_t i = 0; i < k; ++i) {
            size_t j = i + static_cast<size_t>(rng.bounded(d - i));
            std::swap(feature_scratch_[i], feature_scratch_[j]);
        }
        std::sort(feature_scratch_.begin(), feature_scratch_.begin() + static_cast<long>(k));

        const double parent_impurity = impurity(w0, w1, crit_);
        BestCandidate best;
        for (size_t c = 0; c < k; ++c) {
            const int f = feature_scratch_[c];
            const auto& col = ds_.columns[static_cast<size_t>(f)];
            items_.clear();
            items_.reserve(n);
            for (size_t i = begin; i < end; ++i) {
                const NodeEntry& e = (*entries_)[i];
                items_.push_back({col[e.row], e.weight, e.label});
            }
            scan_feature(items_, f, w0, w1, parent_impurity, crit_, best);
        }
        if (!best.valid || best.gain <= kMinGain) {
            return make_leaf_with(w0, w1, tree);
        }

        (*importances_)[static_cast<size_t>(best.feature)] += (w0 + w1) * best.gain;

        // Partition: value <= threshold goes left.
        const auto& col = ds_.columns[static_cast<size_t>(best.feature)];
        size_t mid = begin;
        for (size_t i = begin; i < end; ++i) {
            if (col[(*entries_)[i].row] <= best.threshold) {
                std::swap((*entries_)[i], (*entries_)[mid]);
                ++mid;
            }
        }

        TreeNode node;
        node.feature = best.feature;
        node.threshold = best.threshold;
        tree.nodes.push_back(node);
        const int32_t self = static_cast<int32_t>(tree.nodes.size() - 1);
        const int32_t left = build_node(begin, mid, rng, tree);
        const int32_t right = build_node(mid, end, rng, tree);
        tree.nodes[static_cast<size_t>(self)].left = left;
        tree.nodes[static_cast<size_t>(self)].right = right;
        return self;
    }

    int32_t make_leaf_with(double w0, double w1, Tree& tree) {
        TreeNode node;
        node.p1 = (w0 + w1) > 0.0 ? w1 / (w0 + w1) : 0.5;
        node.p0 = 1.0 - node.p1;
        tree.nodes.push_back(node);
        return static_cast<int32_t>(tree.nodes.size() - 1);
    }

    const Dataset& ds_;
    Criterion crit_;
    int max_features_;
    int min_samples_split_;
    int min_samples_leaf_;
    std::vector<NodeEntry>* entries_ = nullptr;
    std::vector<double>* importances_ = nullptr;
    std::vector<int> feature_scratch_;
    std::vector<SortItem> items_;
};

int resolved_max_features(const ForestConfig& cfg, size_t d) {
    if (d == 0) throw std::invalid_argument("fit: dataset has no features");
    int mf = cfg.max_features;
    if (mf <= 0) mf = static_cast<int>(std::floor(std::sqrt(static_cast<double>(d))));
    if (mf < 1) mf = 1;
    if (mf > static_cast<int>(d)) mf = static_cast<int>(d);
    return mf;
}

} // namespace

std::optional<Split> best_split(const Dataset& ds, std::span<const size_t> rows,
                                std::span<const double> weights,
                                std::span<const int> candidate_features, Criterion c,
                                int min_samples_split) {
    if (rows.size() != weights.size()) {
        throw std::invalid_argument("best_split: rows / weights size mismatch");
    }
    double w0 = 0, w1 = 0;
    for (size_t i = 0; i < rows.size(); ++i) {
        (ds.labels[rows[i]] == 1 ? w1 : w0) += weights[i];
    }
    if (w0 <= 0.0 || w1 <= 0.0 || rows.size() < static_cast<size_t>(min_samples_split)) {
        return std::nullopt;
    }
    const double parent_impurity = impurity(w0, w1, c);

    std::vector<int> order(candidate_features.begin(), candidate_features.end());
    std::sort(order.begin(), order.end());

    BestCandidate best;
    std::vector<SortItem> items;
    for (int f : order) {
        const auto& col = ds.columns[static_cast<size_t>(f)];
        items.clear();
        items.reserve(rows.size());
        for (size_t i = 0; i < rows.size(); ++i) {
            items.push_back({col[rows[i]], weights[i], ds.labels[rows[i]]});
        }
        scan_feature(items, f, w0, w1, parent_impurity, c, best);
    }
    if (!best.valid || best.gain <= kMinGain) return std::nullopt;
    return Split{best.feature, best.threshold, best.gain};
}

const TreeNode& Tree::leaf_for(std::span<const double> row) const {
    const TreeNode* node = &nodes[0];
    while (node->feature >= 0) {
        node = row[static_cast<size_t>(node->feature)] <= node->threshold
                   ? &nodes[static_cast<size_t>(node->left)]
                   : &nodes[static_cast<size_t>(node->right)];
    }
    return *node;
}

std::pair<double, double> TrainedForest::predict_proba(std::span<const double> row) const {
    if (row.size() != feature_names.size()) {
        throw std::invalid_argument("predict_proba: row has wrong feature count");
    }
    double acc1 = 0.0;
    for (const auto& tree : trees) acc1 += tree.leaf_for(row).p1;
    const double p1 = acc1 / static_cast<double>(trees.size());
    return {1.0 - p1, p1};
}

int TrainedForest::predict(std::span<const double> row, double threshold) const {
    return predict_proba(row).second > threshold ? 1 : 0;
}

TrainedForest fit(const Dataset& ds, const ForestConfig& cfg) {
    ds.validate();
    const size_t n = ds.n_rows();
    const size_t d = ds.n_features();
    if (n == 0) throw std::invalid_argument("fit: empty dataset");
    if (cfg.n_estimators < 1) throw std::invalid_argument("fit: n_estimators must be >= 1");

    ForestConfig resolved = cfg;
    resolved.max_features = resolved_max_features(cfg, d);

    TrainedForest forest;
    forest.config = resolved;
    forest.feature_names = ds.feature_names;
    forest.importances.assign(d, 0.0);

    bool has0 = false, has1 = false;
    for (int l : ds.labels) (l == 1 ? has1 : has0) = true;
    forest.single_class_training = !(has0 && has1);

    std::array<double, 2> global_cw = {1.0, 1.0};
    if (cfg.class_weight == ClassWeight::balanced) {
        global_cw = balanced_class_weights(ds.labels);
    }

    TreeBuilder builder(ds, cfg.criterion, resolved.max_features, cfg.min_samples_split,
                        cfg.min_samples_leaf);

    std::vector<uint32_t> counts(n);
    std::vector<NodeEntry> entries;
    forest.trees.reserve(static_cast<size_t>(cfg.n_estimators));
    for (int t = 0; t < cfg.n_estimators; ++t) {
        Rng rng(derive_seed(cfg.seed, static_cast<uint64_t>(t)));

        entries.clear();
        if (cfg.bootstrap) {
            std::fill(counts.begin(), counts.end(), 0u);
            for (size_t i = 0; i < n; ++i) ++counts[rng.bounded(n)];
            std::array<double, 2> cw = global_cw;
            if (cfg.class_weight == ClassWeight::balanced_subsample) {
                double n0 = 0, n1 = 0;
                for (size_t r = 0; r < n; ++r) {
                    (ds.labels[r] == 1 ? n1 : n0) += counts[r];
                }
                cw = {0.0, 0.0};
                if (n0 > 0) cw[0] = static_cast<double>(n) / (2.0 * n0);
                if (n1 > 0) cw[1] = static_cast<double>(n) / (2.0 * n1);
            }
            for (size_t r = 0; r < n; ++r) {
                if (counts[r] == 0) continue;
                const double sw = ds.sample_weights.empty() ? 1.0 : ds.sample_weights[r];
                entries.push_back({static_cast<uint32_t>(r), ds.labels[r],
                                   counts[r] * cw[static_cast<size_t>(ds.labels[r])] * sw});
            }
        } else {
            std::array<double, 2> cw = global_cw;
            if (cfg.class_weight == ClassWeight::balanced_subsample) {
                // Without bootstrap the subsample is the whole set.
                cw = balanced_class_weights(ds.labels);
            }
            for (size_t r = 0; r < n; ++r) {
                const double sw = ds.sample_weights.empty() ? 1.0 : ds.sample_weights[r];
                entries.push_back({static_cast<uint32_t>(r), ds.labels[r],
                                   cw[static_cast<size_t>(ds.labels[r])] * sw});
            }
        }
        forest.trees.push_back(builder.build(entries, rng, forest.importances));
    }

    double total = 0.0;
    for (double v : forest.importances) total += v;
    if (total > 0.0) {
        for (double& v : forest.importances) v /= total;
    }
    return forest;
}

// --- serialization -----------------------------------------------------------

namespace {

std::string hexd(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double parse_hexd(const std::string& s) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw std::runtime_error("bad float: " + s);
    return v;
}

} // namespace

void save_model(const std::string& path, const TrainedForest& forest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot create");
    save_model(out, forest);
    if (!out) throw std::runtime_error(path + ": write failed");
}

TrainedForest load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    return load_model(in);
}

void save_model(std::ostream& out, const TrainedForest& forest) {
    out << "natforest-model 1\n";
    out << "criterion " << to_string(forest.config.criterion) << "\n";
    out << "class_weight " << to_string(forest.config.class_weight) << "\n";
    out << "n_estimators " << forest.config.n_estimators << "\n";
    out << "seed " << forest.config.seed << "\n";
    out << "max_features " << forest.config.max_features << "\n";
    out << "bootstrap " << (forest.config.bootstrap ? 1 : 0) << "\n";
    out << "single_class " << (forest.single_class_training ? 1 : 0) << "\n";
    out << "features " << forest.feature_names.size();
    for (const auto& name : forest.feature_names) out << " " << name;
    out << "\n";
    out << "importances";
    for (double v : forest.importances) out << " " << hexd(v);
    out << "\n";
    for (const auto& tree : forest.trees) {
        out << "tree " << tree.nodes.size() << "\n";
        for (const auto& n : tree.nodes) {
            if (n.feature < 0) {
                out << "leaf " << hexd(n.p0) << " " << hexd(n.p1) << "\n";
            } else {
                out << "split " << n.feature << " " << hexd(n.threshold) << " " << n.left
                    << " " << n.right << "\n";
            }
        }
    }
}

TrainedForest load_model(std::istream& in) {
    const std::string path = "model";
    std::string word;
    int version = 0;
    in >> word >> version;
    if (word != "natforest-model" || version != 1) {
        throw std::runtime_error(path + ": not a natforest model file");
    }
    TrainedForest forest;
    std::string key;
    in >> key >> word;
    auto crit = criterion_from_string(word);
    if (key != "criterion" || !crit) throw std::runtime_error(path + ": bad criterion");
    forest.config.criterion = *crit;
    in >> key >> word;
    auto cw = class_weight_from_string(word);
    if (key != "class_weight" || !cw) throw std::runtime_error(path + ": bad class_weight");
    forest.config.class_weight = *cw;
    in >> key >> forest.config.n_estimators;
    if (key != "n_estimators") throw std::runtime_error(path + ": bad n_estimators");
    in >> key >> forest.config.seed;
    if (key != "seed") throw std::runtime_error(path + ": bad seed");
    in >> key >> forest.config.max_features;
    if (key != "max_features") throw std::runtime_error(path + ": bad max_features");
    int flag = 0;
    in >> key >> flag;
    if (key != "bootstrap") throw std::runtime_error(path + ": bad bootstrap");
    forest.config.bootstrap = flag != 0;
    in >> key >> flag;
    if (key != "single_class") throw std::runtime_error(path + ": bad single_class");
    forest.single_class_training = flag != 0;

    size_t n_features = 0;
    in >> key >> n_features;
    if (key != "features") throw std::runtime_error(path + ": bad features line");
    forest.feature_names.resize(n_features);
    for (auto& name : forest.feature_names) in >> name;
    in >> key;
    if (key != "importances") throw std::runtime_error(path + ": bad importances line");
    forest.importances.resize(n_features);
    for (auto& v : forest.importances) {
        in >> word;
        v = parse_hexd(word);
    }

    while (in >> key) {
        if (key != "tree") throw std::runtime_error(path + ": expected tree");
        size_t count = 0;
        in >> count;
        Tree tree;
        tree.nodes.reserve(count);
        for (size_t i = 0; i < count; ++i) {
            in >> word;
            TreeNode node;
            if (word == "leaf") {
                std::string a, b;
                in >> a >> b;
                node.p0 = parse_hexd(a);
                node.p1 = parse_hexd(b);
            } else if (word == "split") {
                std::string thr;
                in >> node.feature >> thr >> node.left >> node.right;
                node.threshold = parse_hexd(thr);
            } else {
                throw std::runtime_error(path + ": bad node kind " + word);
            }
            tree.nodes.push_back(node);
        }
        if (!in) throw std::runtime_error(path + ": truncated tree");
        forest.trees.push_back(std::move(tree));
    }
    if (forest.trees.size() != static_cast<size_t>(forest.config.n_estimators)) {
        throw std::runtime_error(path + ": tree count does not match n_estimators");
    }
    return forest;
}

} // namespace natforest
