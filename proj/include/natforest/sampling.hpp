#pragma once

#include <cstdint>
#include <vector>

#include "natforest/records.hpp"

namespace natforest {

struct SamplingPlan {
    double p = 0.5;
    double q = 0.5;
    double confidence = 0.95;
    double error = 0.05;
    double z = 0.0;
    int64_t n = 0;
};

// n = ceil(z^2 * p * (1-p) / e^2) with z the two-sided normal quantile.
// Infinite-population formula, no finite-population correction.
// Throws std::domain_error for out-of-range inputs.
SamplingPlan required_sample_size(double p, double confidence, double error);

// Uniform sample without replacement, deterministic under seed, returned in
// author_id order. Throws std::invalid_argument when n > |rows|.
std::vector<UserFeatureRow> draw_sample(const std::vector<UserFeatureRow>& rows, size_t n,
                                        uint64_t seed);

struct ProportionEstimate {
    double point = 0.0;
    double low = 0.0;
    double high = 0.0;
};

// point = k/n with a Wald interval point +- z*sqrt(point(1-point)/n), clamped
// to [0, 1]. Throws std::domain_error when n = 0 or k > n.
ProportionEstimate estimate_proportion(int64_t k, int64_t n, double confidence);

} // namespace natforest
