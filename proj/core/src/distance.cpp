#include "nnlab/distance.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace nnlab {

double l2_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument(
            "l2_distance: dimension mismatch (" + std::to_string(a.size()) +
            " vs " + std::to_string(b.size()) + ")");
    }
    return std::sqrt(
        l2_distance_sq_unchecked(a.data(), b.data(), static_cast<int>(a.size())));
}

double l2_distance_sq_unchecked(const double* a, const double* b, int dim) {
    double sum = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double diff = a[i] - b[i];
        sum += diff * diff;
    }
    return sum;
}

double shell_cost_factor(double epsilon, int64_t r, bool log_space) {
    if (!(epsilon >= 0.0)) {
        throw std::invalid_argument("shell_cost_factor: epsilon must be >= 0");
    }
    if (r < 1) {
        throw std::invalid_argument("shell_cost_factor: r must be >= 1");
    }
    const double log_value = static_cast<double>(r - 1) * std::log1p(epsilon);
    if (log_space) {
        return log_value;
    }
    const double value = std::exp(log_value);
    if (!std::isfinite(value)) {
        throw std::overflow_error(
            "shell_cost_factor: (1+epsilon)^(r-1) overflows double for r = " +
            std::to_string(r) + "; use log_space");
    }
    return value;
}

}  // namespace nnlab
