#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nnlab/neighbors.hpp"
#include "nnlab/rng.hpp"

namespace nnlab {

// Local two-class model at a query point: the minority-class posterior E
// (the Bayes-optimal error rate there, in [0, 0.5]) and the number k of
// candidate neighbors, whose labels are i.i.d. draws from that posterior.
struct LocalModel {
    double minority_posterior = 0.0;  // E
    int64_t k = 1;                    // k_eps
};

// Monte Carlo error frequency with a 4-sigma binomial confidence half-width.
struct ErrorEstimate {
    double rate = 0.0;
    int64_t trials = 0;
    double half_width = 0.0;  // 4 * sqrt(rate * (1 - rate) / trials)
};

// --- Closed forms derived from the local model -----------------------------
//
// Each *printed* variant below is the alternate algebraic form these rates
// circulate under; the Monte Carlo simulator arbitrates between the two
// (see README "Formula audit"). Where the variants disagree, the derived
// form is the one the simulator confirms.

// Error when the representative is a uniformly random candidate:
// (1-E)E + E(1-E) = 2E(1-E). At most 2E.
double closed_form_random(double E);
// Alternate printed simplification 2E - E^2.
double printed_form_random(double E);

// Probability that at least one minority-class point appears among k i.i.d.
// neighbors: H = 1 - (1-E)^k.
double neighborhood_hit_prob(double E, int64_t k);

// Error when the representative is a minority-class candidate whenever one
// exists: H(1-E) + (1-H)E. Approaches 1-E as k grows.
double closed_form_minority(double E, int64_t k);
// Alternate printed large-k value 1 - E - 2E^2.
double printed_form_minority(double E);

// Error when the representative avoids the query's class whenever possible:
// E(1 - E^k) + (1-E)(1 - (1-E)^k). Approaches 1 as k grows for E > 0.
double closed_form_wrongclass(double E, int64_t k);
// Alternate printed variant with the exponent bases swapped:
// E(1 - (1-E)^k) + (1-E)(1 - E^k).
double printed_form_wrongclass(double E, int64_t k);

// Monte Carlo oracle for the local model. Per trial, in this draw order:
// query label (minority with probability E), k neighbor labels i.i.d., then
// the policy's selection (preferred-class policies take the lowest-index
// match and consume a uniform draw only on fallback). Farthest is
// inapplicable (the local model has no geometry) and throws.
ErrorEstimate simulate_local(const LocalModel& model,
                             const SelectionPolicy& policy, int64_t trials,
                             RngStream& rng);

struct ErrorTableRow {
    double E = 0.0;
    int64_t k = 1;
    SelectionPolicy::Kind policy = SelectionPolicy::Kind::kRandomUniform;
    double closed_form = 0.0;
    double paper_printed_form = 0.0;
    double monte_carlo = 0.0;
    double half_width = 0.0;
    int64_t trials = 0;
    bool agree = false;  // |closed_form - monte_carlo| <= half_width
};

// One row per (E, k, policy) combination; each row simulates on its own
// derived stream, so rows are independent of grid order.
std::vector<ErrorTableRow> error_rate_table(
    std::span<const double> E_grid, std::span<const int64_t> k_grid,
    std::span<const SelectionPolicy::Kind> policies, int64_t trials,
    uint64_t seed);

}  // namespace nnlab
