#include "natforest/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace natforest {

uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

uint64_t derive_seed(uint64_t base, uint64_t stream) {
    return mix64(base ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

namespace {
inline uint64_t rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}
} // namespace

Rng::Rng(uint64_t seed) {
    // Expand the seed through splitmix64; xoshiro state must not be all zero.
    uint64_t sm = seed;
    for (auto& s : s_) {
        sm += 0x9e3779b97f4a7c15ULL;
        s = mix64(sm);
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

uint64_t Rng::next() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

uint64_t Rng::bounded(uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::bounded: n must be > 0");
    const uint64_t threshold = (0 - n) % n;
    for (;;) {
        uint64_t r = next();
        if (r >= threshold) return r % n;
    }
}

double Rng::unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double u1, u2;
    do {
        u1 = unit();
    } while (u1 <= 0.0);
    u2 = unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return r * std::cos(theta);
}

double Rng::gamma(double shape) {
    if (shape <= 0.0) throw std::invalid_argument("Rng::gamma: shape must be > 0");
    if (shape < 1.0) {
        // Boost to shape+1 and scale back (Marsaglia-Tsang section 8).
        const double u = unit();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = unit();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

uint64_t Rng::poisson(double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("Rng::poisson: lambda must be >= 0");
    if (lambda == 0.0) return 0;
    if (lambda < 30.0) {
        // Knuth multiplication method.
        const double l = std::exp(-lambda);
        uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= unit();
        } while (p > l);
        return k - 1;
    }
    // Split recursively; keeps each multiplication chain short and exact
    // enough for the count magnitudes used here.
    const double half = lambda / 2.0;
    return poisson(half) + poisson(lambda - half);
}

uint64_t Rng::neg_binomial(double mean, double dispersion) {
    if (mean < 0.0) throw std::invalid_argument("Rng::neg_binomial: mean must be >= 0");
    if (mean == 0.0) return 0;
    if (dispersion <= 0.0) throw std::invalid_argument("Rng::neg_binomial: dispersion must be > 0");
    const double scale = mean / dispersion;
    return poisson(gamma(dispersion) * scale);
}

std::vector<size_t> Rng::sample_without_replacement(size_t n, size_t k) {
    if (k > n) throw std::invalid_argument("Rng::sample_without_replacement: k > n");
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    // Partial Fisher-Yates: first k entries are the sample.
    for (size_t i = 0; i < k; ++i) {
        size_t j = i + static_cast<size_t>(bounded(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

} // namespace natforest
