#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace natforest {

// splitmix64 step; used to derive well-mixed seeds from (base, stream) pairs.
uint64_t mix64(uint64_t x);

// Deterministic seed for an independent stream, e.g. per search cell or per
// tree. derive_seed(derive_seed(base, a), b) gives nested streams.
uint64_t derive_seed(uint64_t base, uint64_t stream);

// Self-contained xoshiro256** generator. The standard library engines are
// portable but its distributions are not, so every draw that must reproduce
// byte-identically across runs and worker counts goes through this class.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next();
    // Uniform in [0, n), n > 0. Rejection sampling, no modulo bias.
    uint64_t bounded(uint64_t n);
    // Uniform in [0, 1).
    double unit();
    // Standard normal (Box-Muller, one value cached).
    double normal();
    // Gamma(shape, 1), shape > 0. Marsaglia-Tsang.
    double gamma(double shape);
    // Poisson(lambda), lambda >= 0.
    uint64_t poisson(double lambda);
    // Overdispersed count with the given mean; dispersion > 0 is the
    // gamma shape (smaller = heavier tail). Gamma-Poisson mixture.
    uint64_t neg_binomial(double mean, double dispersion);

    // Fisher-Yates.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices from [0, n), in random order.
    std::vector<size_t> sample_without_replacement(size_t n, size_t k);

private:
    uint64_t s_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

} // namespace natforest
