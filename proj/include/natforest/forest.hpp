#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace natforest {

enum class Criterion { gini, entropy };
enum class ClassWeight { none, balanced, balanced_subsample };

const char* to_string(Criterion c);
const char* to_string(ClassWeight w);
std::optional<Criterion> criterion_from_string(const std::string& s);
std::optional<ClassWeight> class_weight_from_string(const std::string& s);

// Column-major numeric dataset for binary classification.
struct Dataset {
    std::vector<std::vector<double>> columns; // columns[feature][row]
    std::vector<int> labels;                  // each 0 or 1
    std::vector<double> sample_weights;       // empty means all 1.0
    std::vector<std::string> feature_names;

    size_t n_rows() const { return labels.size(); }
    size_t n_features() const { return columns.size(); }
    void validate() const; // throws std::invalid_argument on shape mismatch
};

struct ForestConfig {
    int n_estimators = 10;
    Criterion criterion = Criterion::gini;
    ClassWeight class_weight = ClassWeight::none;
    uint64_t seed = 123;
    // 0 selects floor(sqrt(d)); otherwise clamped to [1, d].
    int max_features = 0;
    bool bootstrap = true;
    int min_samples_split = 2;
    int min_samples_leaf = 1;
};

struct TreeNode {
    int32_t feature = -1; // -1 marks a leaf
    int32_t left = -1;
    int32_t right = -1;
    double threshold = 0.0;
    double p0 = 0.0, p1 = 0.0; // leaf class distribution, p0 + p1 = 1
};

struct Tree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    const TreeNode& leaf_for(std::span<const double> row) const;
};

struct TrainedForest {
    ForestConfig config;
    std::vector<std::string> feature_names;
    std::vector<Tree> trees;
    std::vector<double> importances; // per feature; sums to 1 when any split occurred
    bool single_class_training = false;

    // Soft vote: average of leaf distributions. Returned pair sums to 1.
    std::pair<double, double> predict_proba(std::span<const double> row) const;
    // 1 iff prob1 is strictly greater than the threshold.
    int predict(std::span<const double> row, double threshold = 0.5) const;
};

// Node impurity from weighted class totals. gini = 1 - sum p_i^2,
// entropy = -sum p_i log2 p_i with 0 log 0 = 0. Throws std::domain_error when
// both weights are zero.
double impurity(double weight0, double weight1, Criterion c);

// n / (2 * count(c)) for each present class; absent class gets weight 0.
std::array<double, 2> balanced_class_weights(std::span<const int> labels);

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Best (feature, threshold) over the candidate features, thresholds at
// midpoints between consecutive distinct sorted values. Gain is the weighted
// impurity decrease of the node. Returns nullopt for pure nodes, nodes below
// min_samples_split, or when no split has positive gain. Ties break toward
// the lower feature index, then the lower threshold.
std::optional<Split> best_split(const Dataset& ds, std::span<const size_t> rows,
                                std::span<const double> weights,
                                std::span<const int> candidate_features, Criterion c,
                                int min_samples_split = 2);

TrainedForest fit(const Dataset& ds, const ForestConfig& cfg);

// Self-describing text format; reloads to bit-identical predictions.
void save_model(std::ostream& out, const TrainedForest& forest);
void save_model(const std::string& path, const TrainedForest& forest);
TrainedForest load_model(std::istream& in);
TrainedForest load_model(const std::string& path);

} // namespace natforest
