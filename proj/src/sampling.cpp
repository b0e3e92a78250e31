#include "natforest/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "natforest/rng.hpp"
#include "natforest/stats.hpp"

namespace natforest {

SamplingPlan required_sample_size(double p, double confidence, double error) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("required_sample_size: p out of (0,1)");
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw std::domain_error("required_sample_size: confidence out of (0,1)");
    }
    if (!(error > 0.0 && error < 1.0)) {
        throw std::domain_error("required_sample_size: error out of (0,1)");
    }
    SamplingPlan plan;
    plan.p = p;
    plan.q = 1.0 - p;
    plan.confidence = confidence;
    plan.error = error;
    plan.z = two_sided_z(confidence);
    plan.n = static_cast<int64_t>(std::ceil(plan.z * plan.z * plan.p * plan.q / (error * error)));
    if (plan.n < 1) plan.n = 1;
    return plan;
}

std::vector<UserFeatureRow> draw_sample(const std::vector<UserFeatureRow>& rows, size_t n,
                                        uint64_t seed) {
    if (n > rows.size()) {
        throw std::invalid_argument("draw_sample: n exceeds available rows");
    }
    Rng rng(seed);
    auto picks = rng.sample_without_replacement(rows.size(), n);
    std::vector<UserFeatureRow> out;
    out.reserve(n);
    for (size_t i : picks) out.push_back(rows[i]);
    std::sort(out.begin(), out.end(), [](const UserFeatureRow& a, const UserFeatureRow& b) {
        return a.author_id < b.author_id;
    });
    return out;
}

ProportionEstimate estimate_proportion(int64_t k, int64_t n, double confidence) {
    if (n <= 0) throw std::domain_error("estimate_proportion: n must be > 0");
    if (k < 0 || k > n) throw std::domain_error("estimate_proportion: k out of [0, n]");
    ProportionEstimate est;
    est.point = static_cast<double>(k) / static_cast<double>(n);
    const double z = two_sided_z(confidence);
    const double half = z * std::sqrt(est.point * (1.0 - est.point) / static_cast<double>(n));
    est.low = std::max(0.0, est.point - half);
    est.high = std::min(1.0, est.point + half);
    return est;
}

} // namespace natforest
