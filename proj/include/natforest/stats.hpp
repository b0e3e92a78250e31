#pragma once

namespace natforest {

// Inverse standard-normal CDF. Acklam's rational approximation refined with
// one Halley step against erfc, good to ~1e-15 over (0, 1).
double normal_quantile(double p);

// Two-sided z for a confidence level, e.g. 0.95 -> 1.959964.
double two_sided_z(double confidence);

} // namespace natforest
