#include "nnlab/analysis.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nnlab {

namespace {

void check_posterior(double E) {
    if (!(E >= 0.0 && E <= 0.5)) {
        throw std::invalid_argument(
            "minority posterior E must lie in [0, 0.5]; got " +
            std::to_string(E));
    }
}

void check_k(int64_t k) {
    if (k < 1) {
        throw std::invalid_argument("neighbor count k must be >= 1");
    }
}

}  // namespace

double closed_form_random(double E) {
    check_posterior(E);
    return (1.0 - E) * E + E * (1.0 - E);
}

double printed_form_random(double E) {
    check_posterior(E);
    return 2.0 * E - E * E;
}

double neighborhood_hit_prob(double E, int64_t k) {
    check_posterior(E);
    check_k(k);
    return 1.0 - std::pow(1.0 - E, static_cast<double>(k));
}

double closed_form_minority(double E, int64_t k) {
    check_posterior(E);
    check_k(k);
    // At k = 1 the hit probability H collapses to E and the rate reduces
    // algebraically to the random-pick rate. Going through that reduction
    // keeps the identity bit-exact, which 1 - (1 - E) would not.
    if (k == 1) return closed_form_random(E);
    const double H = neighborhood_hit_prob(E, k);
    return H * (1.0 - E) + (1.0 - H) * E;
}

double printed_form_minority(double E) {
    check_posterior(E);
    return 1.0 - E - 2.0 * E * E;
}

double closed_form_wrongclass(double E, int64_t k) {
    check_posterior(E);
    check_k(k);
    const double dk = static_cast<double>(k);
    return E * (1.0 - std::pow(E, dk)) +
           (1.0 - E) * (1.0 - std::pow(1.0 - E, dk));
}

double printed_form_wrongclass(double E, int64_t k) {
    check_posterior(E);
    check_k(k);
    const double dk = static_cast<double>(k);
    return E * (1.0 - std::pow(1.0 - E, dk)) +
           (1.0 - E) * (1.0 - std::pow(E, dk));
}

ErrorEstimate simulate_local(const LocalModel& model,
                             const SelectionPolicy& policy, int64_t trials,
                             RngStream& rng) {
    using Kind = SelectionPolicy::Kind;
    const double E = model.minority_posterior;
    const int64_t k = model.k;
    check_posterior(E);
    check_k(k);
    if (trials < 1) {
        throw std::invalid_argument("simulate_local: trials must be >= 1");
    }
    if (policy.kind == Kind::kFarthest) {
        throw std::invalid_argument(
            "simulate_local: Farthest needs geometry and does not apply to "
            "the local model");
    }

    // Label convention: 1 = minority (probability E), 0 = majority.
    std::vector<int> labels(static_cast<size_t>(k));
    int64_t errors = 0;
    for (int64_t t = 0; t < trials; ++t) {
        const int query = rng.next_double() < E ? 1 : 0;
        for (int& label : labels) {
            label = rng.next_double() < E ? 1 : 0;
        }

        int selected;
        switch (policy.kind) {
            case Kind::kRandomUniform:
                selected = labels[rng.uniform_int(static_cast<uint64_t>(k))];
                break;
            case Kind::kFirstIndex:
                selected = labels[0];
                break;
            case Kind::kMinorityClass: {
                int found = -1;
                for (int label : labels) {
                    if (label == 1) { found = 1; break; }
                }
                selected = found == 1
                    ? 1
                    : labels[rng.uniform_int(static_cast<uint64_t>(k))];
                break;
            }
            case Kind::kWrongClass: {
                int found = -1;
                for (int label : labels) {
                    if (label != query) { found = label; break; }
                }
                selected = found >= 0
                    ? found
                    : labels[rng.uniform_int(static_cast<uint64_t>(k))];
                break;
            }
            default:
                throw std::logic_error("simulate_local: unreachable policy");
        }
        errors += selected != query;
    }

    ErrorEstimate est;
    est.trials = trials;
    est.rate = static_cast<double>(errors) / static_cast<double>(trials);
    est.half_width =
        4.0 * std::sqrt(est.rate * (1.0 - est.rate) /
                        static_cast<double>(trials));
    return est;
}

namespace {

double closed_form_for(SelectionPolicy::Kind kind, double E, int64_t k) {
    using Kind = SelectionPolicy::Kind;
    switch (kind) {
        case Kind::kRandomUniform:
        case Kind::kFirstIndex:
            return closed_form_random(E);
        case Kind::kMinorityClass:
            return closed_form_minority(E, k);
        case Kind::kWrongClass:
            return closed_form_wrongclass(E, k);
        default:
            throw std::invalid_argument(
                "error_rate_table: no closed form for policy " +
                std::string(to_string(kind)));
    }
}

double printed_form_for(SelectionPolicy::Kind kind, double E, int64_t k) {
    using Kind = SelectionPolicy::Kind;
    switch (kind) {
        case Kind::kRandomUniform:
        case Kind::kFirstIndex:
            return printed_form_random(E);
        case Kind::kMinorityClass:
            return printed_form_minority(E);
        case Kind::kWrongClass:
            return printed_form_wrongclass(E, k);
        default:
            throw std::invalid_argument(
                "error_rate_table: no printed form for policy " +
                std::string(to_string(kind)));
    }
}

SelectionPolicy policy_for_local(SelectionPolicy::Kind kind) {
    // In the local model the query label is 1 with probability E; WrongClass
    // receives it per trial, which simulate_local handles internally, so the
    // carried label is unused there.
    SelectionPolicy p;
    p.kind = kind;
    return p;
}

}  // namespace

std::vector<ErrorTableRow> error_rate_table(
    std::span<const double> E_grid, std::span<const int64_t> k_grid,
    std::span<const SelectionPolicy::Kind> policies, int64_t trials,
    uint64_t seed) {
    if (E_grid.empty() || k_grid.empty() || policies.empty()) {
        throw std::invalid_argument("error_rate_table: grids must be non-empty");
    }
    std::vector<ErrorTableRow> rows;
    rows.reserve(E_grid.size() * k_grid.size() * policies.size());
    for (size_t ei = 0; ei < E_grid.size(); ++ei) {
        for (size_t ki = 0; ki < k_grid.size(); ++ki) {
            for (size_t pi = 0; pi < policies.size(); ++pi) {
                ErrorTableRow row;
                row.E = E_grid[ei];
                row.k = k_grid[ki];
                row.policy = policies[pi];
                row.closed_form = closed_form_for(row.policy, row.E, row.k);
                row.paper_printed_form =
                    printed_form_for(row.policy, row.E, row.k);
                // The stream id derives from the cell's values, not its grid
                // position, so a row's estimate is the same in any grid that
                // contains the cell.
                RngStream rng(seed,
                              stream_id_for(
                                  "local-sim",
                                  {std::bit_cast<uint64_t>(row.E),
                                   static_cast<uint64_t>(row.k),
                                   static_cast<uint64_t>(row.policy)}));
                const ErrorEstimate est = simulate_local(
                    {row.E, row.k}, policy_for_local(row.policy), trials, rng);
                row.monte_carlo = est.rate;
                row.half_width = est.half_width;
                row.trials = est.trials;
                row.agree =
                    std::abs(row.closed_form - row.monte_carlo) <= row.half_width;
                rows.push_back(row);
            }
        }
    }
    return rows;
}

}  // namespace nnlab
