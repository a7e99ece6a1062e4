#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nnlab/dataset.hpp"
#include "nnlab/rng.hpp"

namespace nnlab {

// Result of a (tied, approximate, or fractile) nearest-neighbor query.
// `candidates` is sorted ascending by point index and always contains an
// index attaining `rho`; `distances` is aligned with `candidates`.
struct NeighborQueryResult {
    double rho = 0.0;
    std::vector<int64_t> candidates;
    std::vector<double> distances;
    int64_t k_eps = 0;  // == candidates.size()
};

// Rule for picking one representative out of a candidate set. The adversarial
// variants exist to demonstrate how much freedom the candidate-set definition
// leaves to the answering algorithm.
struct SelectionPolicy {
    enum class Kind {
        kRandomUniform,
        kFirstIndex,
        kMinorityClass,
        kWrongClass,
        kFarthest,
    };

    Kind kind = Kind::kRandomUniform;
    // Query's true label; only meaningful for kWrongClass.
    int wrong_class_true_label = -1;

    static SelectionPolicy random_uniform() { return {Kind::kRandomUniform, -1}; }
    static SelectionPolicy first_index() { return {Kind::kFirstIndex, -1}; }
    static SelectionPolicy minority_class() { return {Kind::kMinorityClass, -1}; }
    static SelectionPolicy wrong_class(int true_label) {
        return {Kind::kWrongClass, true_label};
    }
    static SelectionPolicy farthest() { return {Kind::kFarthest, -1}; }
};

std::string_view to_string(SelectionPolicy::Kind kind);
std::optional<SelectionPolicy::Kind> policy_kind_from_string(std::string_view s);

// Exact nearest-neighbor query by linear scan. rho is the minimum distance;
// candidates are all indices with d(s_i, q) <= rho * (1 + tie_tol).
//
// tie_tol = 0 detects only exact ties (the right setting for integer-grid
// data, where distances are exact); kFloatTieTol is a sensible relative
// tolerance for floating-point inputs.
inline constexpr double kFloatTieTol = 1e-12;
NeighborQueryResult exact_nn_set(const Dataset& ds, std::span<const double> q,
                                 double tie_tol);

// All indices with d(s_i, q) <= (1 + epsilon) * rho, i.e. every point that an
// epsilon-approximate query is allowed to return.
NeighborQueryResult epsilon_candidate_set(const Dataset& ds,
                                          std::span<const double> q,
                                          double epsilon);

// Picks one candidate index per the policy. `labels` is the dataset's full
// label sequence (empty when unlabeled); the minority class is the globally
// least frequent label, ties toward the smaller label. MinorityClass and
// WrongClass fall back to a uniform draw when no candidate of the preferred
// class exists.
int64_t select_representative(const NeighborQueryResult& result,
                              const SelectionPolicy& policy,
                              std::span<const int> labels, RngStream& rng);

// The max(1, ceil(fractile * N)) indices of smallest distance to q, with
// boundary ties broken toward the smaller index.
NeighborQueryResult fractile_candidate_set(const Dataset& ds,
                                           std::span<const double> q,
                                           double fractile);

// min(1, c / N): a fractile schedule that keeps the candidate-set size
// bounded by roughly c as the database grows.
double fractile_schedule(int64_t n, double c);

// Adds an independent uniform draw from the closed L2 ball of radius
// `amplitude` to a point with integer coordinates. The L2 interpretation
// keeps total displacement of any point below 1/4, so for any two distinct
// grid points the perturbed distances cannot cross: exact nearest-neighbor
// answers stay exact, while exact ties become uniformly random.
Point perturb_grid_point(std::span<const double> p, double amplitude,
                         RngStream& rng);

// Applies perturb_grid_point to every point, in index order. Callers must
// perturb query points the same way before querying. Requires all
// coordinates integral and 0 < amplitude < 1/4.
Dataset perturb_grid_dataset(const Dataset& ds, double amplitude,
                             RngStream& rng);

}  // namespace nnlab
