#pragma once

#include <cstdint>
#include <span>

namespace nnlab {

// Point index paired with its distance to some query.
struct DistanceRecord {
    int64_t index = 0;
    double distance = 0.0;
};

// Euclidean distance. Throws std::invalid_argument on dimension mismatch.
double l2_distance(std::span<const double> a, std::span<const double> b);

// Squared Euclidean distance without the dimension check, for hot loops that
// already validated their inputs.
double l2_distance_sq_unchecked(const double* a, const double* b, int dim);

// Cost factor (1+epsilon)^(r-1) for the volume of the shell between the exact
// and the approximate neighbor, where r is the space dimension. With
// log_space set, returns (r-1)*log1p(epsilon) instead; linear mode throws
// std::overflow_error when the value exceeds the double range, in which case
// callers must use log mode.
double shell_cost_factor(double epsilon, int64_t r, bool log_space = false);

}  // namespace nnlab
