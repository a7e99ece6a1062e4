#include "nnlab/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "nnlab/distance.hpp"

namespace nnlab {

namespace {

void check_query(const Dataset& ds, std::span<const double> q,
                 const char* op) {
    if (ds.size() == 0) {
        throw std::invalid_argument(std::string(op) + ": dataset is empty");
    }
    if (static_cast<int>(q.size()) != ds.dim()) {
        throw std::invalid_argument(
            std::string(op) + ": query dimension " + std::to_string(q.size()) +
            " does not match dataset dimension " + std::to_string(ds.dim()));
    }
}

std::vector<double> all_distances(const Dataset& ds, std::span<const double> q) {
    const int64_t n = ds.size();
    std::vector<double> dist(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        dist[i] = std::sqrt(
            l2_distance_sq_unchecked(ds.point(i).data(), q.data(), ds.dim()));
    }
    return dist;
}

// Shared core of exact_nn_set / epsilon_candidate_set: keep every index with
// d(s_i, q) <= factor * rho.
NeighborQueryResult candidates_within_factor(const Dataset& ds,
                                             std::span<const double> q,
                                             double factor) {
    const std::vector<double> dist = all_distances(ds, q);
    const double rho = *std::min_element(dist.begin(), dist.end());
    const double cutoff = factor * rho;

    NeighborQueryResult result;
    result.rho = rho;
    for (int64_t i = 0; i < static_cast<int64_t>(dist.size()); ++i) {
        if (dist[i] <= cutoff) {
            result.candidates.push_back(i);
            result.distances.push_back(dist[i]);
        }
    }
    result.k_eps = static_cast<int64_t>(result.candidates.size());
    return result;
}

}  // namespace

std::string_view to_string(SelectionPolicy::Kind kind) {
    switch (kind) {
        case SelectionPolicy::Kind::kRandomUniform: return "RandomUniform";
        case SelectionPolicy::Kind::kFirstIndex: return "FirstIndex";
        case SelectionPolicy::Kind::kMinorityClass: return "MinorityClass";
        case SelectionPolicy::Kind::kWrongClass: return "WrongClass";
        case SelectionPolicy::Kind::kFarthest: return "Farthest";
    }
    return "?";
}

std::optional<SelectionPolicy::Kind> policy_kind_from_string(
    std::string_view s) {
    using Kind = SelectionPolicy::Kind;
    if (s == "RandomUniform") return Kind::kRandomUniform;
    if (s == "FirstIndex") return Kind::kFirstIndex;
    if (s == "MinorityClass") return Kind::kMinorityClass;
    if (s == "WrongClass") return Kind::kWrongClass;
    if (s == "Farthest") return Kind::kFarthest;
    return std::nullopt;
}

NeighborQueryResult exact_nn_set(const Dataset& ds, std::span<const double> q,
                                 double tie_tol) {
    check_query(ds, q, "exact_nn_set");
    if (!(tie_tol >= 0.0)) {
        throw std::invalid_argument("exact_nn_set: tie_tol must be >= 0");
    }
    return candidates_within_factor(ds, q, 1.0 + tie_tol);
}

NeighborQueryResult epsilon_candidate_set(const Dataset& ds,
                                          std::span<const double> q,
                                          double epsilon) {
    check_query(ds, q, "epsilon_candidate_set");
    if (!(epsilon >= 0.0)) {
        throw std::invalid_argument(
            "epsilon_candidate_set: epsilon must be >= 0");
    }
    return candidates_within_factor(ds, q, 1.0 + epsilon);
}

int64_t select_representative(const NeighborQueryResult& result,
                              const SelectionPolicy& policy,
                              std::span<const int> labels, RngStream& rng) {
    using Kind = SelectionPolicy::Kind;
    const auto& cand = result.candidates;
    if (cand.empty()) {
        throw std::invalid_argument(
            "select_representative: candidate set is empty");
    }
    const bool needs_labels = policy.kind == Kind::kMinorityClass ||
                              policy.kind == Kind::kWrongClass;
    if (needs_labels && labels.empty()) {
        throw std::invalid_argument(
            "select_representative: policy " +
            std::string(to_string(policy.kind)) +
            " requires a labeled dataset");
    }

    auto uniform_pick = [&]() -> int64_t {
        return cand[rng.uniform_int(cand.size())];
    };

    switch (policy.kind) {
        case Kind::kRandomUniform:
            return uniform_pick();
        case Kind::kFirstIndex:
            return cand.front();  // candidates are sorted by index
        case Kind::kMinorityClass: {
            // Globally least frequent label, ties toward the smaller label.
            int max_label = 0;
            for (int label : labels) max_label = std::max(max_label, label);
            std::vector<int64_t> counts(static_cast<size_t>(max_label) + 1, 0);
            for (int label : labels) ++counts[static_cast<size_t>(label)];
            int minority = -1;
            int64_t best = std::numeric_limits<int64_t>::max();
            for (size_t label = 0; label < counts.size(); ++label) {
                if (counts[label] > 0 && counts[label] < best) {
                    best = counts[label];
                    minority = static_cast<int>(label);
                }
            }
            for (int64_t idx : cand) {
                if (labels[static_cast<size_t>(idx)] == minority) return idx;
            }
            return uniform_pick();
        }
        case Kind::kWrongClass: {
            for (int64_t idx : cand) {
                if (labels[static_cast<size_t>(idx)] !=
                    policy.wrong_class_true_label) {
                    return idx;
                }
            }
            return uniform_pick();
        }
        case Kind::kFarthest: {
            // Maximum distance, ties toward the smaller index; candidate
            // order is ascending by index, so strict > keeps the first.
            size_t arg = 0;
            for (size_t i = 1; i < cand.size(); ++i) {
                if (result.distances[i] > result.distances[arg]) arg = i;
            }
            return cand[arg];
        }
    }
    throw std::logic_error("select_representative: unknown policy");
}

NeighborQueryResult fractile_candidate_set(const Dataset& ds,
                                           std::span<const double> q,
                                           double fractile) {
    check_query(ds, q, "fractile_candidate_set");
    if (!(fractile >= 0.0 && fractile <= 1.0)) {
        throw std::invalid_argument(
            "fractile_candidate_set: fractile must be in [0, 1]");
    }
    const int64_t n = ds.size();
    const int64_t m = std::max<int64_t>(
        1, static_cast<int64_t>(std::ceil(fractile * static_cast<double>(n))));

    const std::vector<double> dist = all_distances(ds, q);
    std::vector<int64_t> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    // (distance, index) ordering: boundary ties go to the smaller index.
    std::partial_sort(order.begin(), order.begin() + m, order.end(),
                      [&dist](int64_t a, int64_t b) {
                          if (dist[a] != dist[b]) return dist[a] < dist[b];
                          return a < b;
                      });

    NeighborQueryResult result;
    result.rho = dist[static_cast<size_t>(order[0])];
    result.candidates.assign(order.begin(), order.begin() + m);
    std::sort(result.candidates.begin(), result.candidates.end());
    result.distances.reserve(static_cast<size_t>(m));
    for (int64_t idx : result.candidates) {
        result.distances.push_back(dist[static_cast<size_t>(idx)]);
    }
    result.k_eps = m;
    return result;
}

double fractile_schedule(int64_t n, double c) {
    if (n < 1) {
        throw std::invalid_argument("fractile_schedule: N must be >= 1");
    }
    if (!(c > 0.0)) {
        throw std::invalid_argument("fractile_schedule: c must be > 0");
    }
    return std::min(1.0, c / static_cast<double>(n));
}

namespace {

// Uniform draw from the closed L2 ball: standard normal direction scaled by
// radius * U^(1/dim).
void add_ball_draw(std::span<double> coords, double radius, RngStream& rng) {
    const int dim = static_cast<int>(coords.size());
    std::vector<double> g(coords.size());
    double norm_sq = 0.0;
    do {
        norm_sq = 0.0;
        for (double& gi : g) {
            gi = rng.normal();
            norm_sq += gi * gi;
        }
    } while (norm_sq == 0.0);
    const double r =
        radius * std::pow(rng.next_double(), 1.0 / static_cast<double>(dim));
    const double scale = r / std::sqrt(norm_sq);
    for (int i = 0; i < dim; ++i) {
        coords[i] += g[static_cast<size_t>(i)] * scale;
    }
}

void check_amplitude(double amplitude) {
    if (!(amplitude > 0.0) || amplitude >= 0.25) {
        throw std::invalid_argument(
            "perturbation amplitude must lie in (0, 1/4); got " +
            std::to_string(amplitude));
    }
}

void check_integral(std::span<const double> p) {
    for (double c : p) {
        if (!std::isfinite(c) || std::floor(c) != c) {
            throw std::invalid_argument(
                "perturb_grid: coordinates must be integral; got " +
                std::to_string(c));
        }
    }
}

}  // namespace

Point perturb_grid_point(std::span<const double> p, double amplitude,
                         RngStream& rng) {
    check_amplitude(amplitude);
    check_integral(p);
    Point out(p.begin(), p.end());
    add_ball_draw(out, amplitude, rng);
    return out;
}

Dataset perturb_grid_dataset(const Dataset& ds, double amplitude,
                             RngStream& rng) {
    check_amplitude(amplitude);
    for (int64_t i = 0; i < ds.size(); ++i) {
        check_integral(ds.point(i));
    }
    std::vector<double> coords = ds.coords();
    const int dim = ds.dim();
    for (int64_t i = 0; i < ds.size(); ++i) {
        add_ball_draw({coords.data() + i * dim, static_cast<size_t>(dim)},
                      amplitude, rng);
    }
    std::optional<std::vector<int>> labels;
    if (ds.labeled()) labels = ds.labels();
    return Dataset(dim, std::move(coords), std::move(labels));
}

}  // namespace nnlab
