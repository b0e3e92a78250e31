// Micro-benchmark for the search hot path: evaluates a slice of the cell grid
// on a synthetic 385-row sample and extrapolates the full-grid wall time.
#include <chrono>
#include <cstdio>

#include "natforest/rng.hpp"
#include "natforest/search.hpp"

using namespace natforest;

int main(int argc, char** argv) {
    const uint32_t stride = argc > 1 ? static_cast<uint32_t>(std::atoi(argv[1])) : 512;

    Rng rng(42);
    LabeledSample sample;
    sample.columns.assign(kNumQuantitative, {});
    for (size_t i = 0; i < 385; ++i) {
        const int label = rng.unit() < 0.77 ? 1 : 0;
        sample.labels.push_back(label);
        sample.author_ids.push_back(10000 + i);
        for (size_t c = 0; c < kNumQuantitative; ++c) {
            const double base = static_cast<double>(rng.neg_binomial(5.0, 1.0));
            const double shift = 0.0; // no signal: worst-case tree depth
            sample.columns[c].push_back(base + shift);
        }
    }

    SearchOptions options;
    options.stride = stride;
    options.workers = 1;

    const auto t0 = std::chrono::steady_clock::now();
    auto rows = run_search(sample, options);
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    const double per_cell_ms = 1000.0 * secs / static_cast<double>(rows.size());
    std::printf("cells=%zu wall=%.2fs per_cell=%.3fms full_grid_est=%.1fmin\n", rows.size(),
                secs, per_cell_ms, per_cell_ms * 196608.0 / 60000.0);
    return 0;
}
