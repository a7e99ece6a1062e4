#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nnlab/dataset.hpp"
#include "nnlab/neighbors.hpp"
#include "nnlab/rng.hpp"

namespace nnlab {

// Coordinate storage for the concentration experiment. Float32 halves the
// memory of the largest cells; distances are accumulated in double either
// way, so the mode only changes what the generated coordinates are rounded
// to before any distance is taken.
enum class Precision { kFloat64, kFloat32 };

struct ConcentrationConfig {
    std::vector<int> dims;
    std::vector<int64_t> sizes;
    int runs = 100;
    uint64_t seed = 0;
    Precision precision = Precision::kFloat64;
    // Cells with n*d at or above big_cell_coord_count run min(runs,
    // big_cell_runs) times instead; on the default 10^4 x 10^4 grid corner
    // that is the single 100M-coordinate cell.
    int big_cell_runs = 20;
    int64_t big_cell_coord_count = 100000000;
    // Concurrency is capped so that simultaneously resident run buffers stay
    // within this budget. A cell whose single run cannot fit is skipped and
    // reported with runs == 0 and NaN statistics, never silently dropped.
    uint64_t memory_budget_bytes = uint64_t{2} << 30;
    int max_threads = 0;  // 0 = hardware concurrency
};

// Five-number summary plus mean of max/min distance ratios for one (n, d)
// cell. A skipped cell (over the memory budget) carries runs == 0 and NaN in
// every statistic.
struct RatioStats {
    int64_t n = 0;
    int d = 0;
    int runs = 0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

// Quantile by linear interpolation between closest ranks: for m sorted
// values, h = p*(m-1), result = x[floor(h)] + frac(h)*(x[floor(h)+1] -
// x[floor(h)]). p must lie in [0, 1]; the input must be sorted ascending.
double quantile_linear(std::span<const double> sorted, double p);

// One concentration measurement: draws a fresh n x d Gaussian database and a
// Gaussian query from rng (database first, row by row, then the query), and
// returns the ratio of the farthest to the nearest database point from the
// query. Throws if the nearest distance is exactly zero (probability zero
// for Gaussian draws).
double distance_ratio_run(int64_t n, int d, Precision precision,
                          RngStream& rng);

// Full grid of (size, dim) cells; run r of cell (n, d) uses the derived
// stream ("concentration", {n, d, r}), so results do not depend on thread
// scheduling. Rows appear in sizes-major, dims-minor order.
std::vector<RatioStats> concentration_experiment(
    const ConcentrationConfig& config);

// Fraction of the database within (1+epsilon) of the nearest-neighbor
// distance, on a fresh Gaussian instance drawn from rng in the same order as
// distance_ratio_run. A stream seeded identically to a ratio run therefore
// sees the same instance, which ties the two measurements together: the
// fraction is 1 exactly when every point passes the (1+epsilon)*rho filter.
double coverage_fraction_run(int64_t n, int d, double epsilon, RngStream& rng);

struct CoverageResult {
    int64_t n = 0;
    int d = 0;
    double epsilon = 0.0;
    int runs = 0;
    double mean_fraction = 0.0;
};

// Mean of coverage_fraction_run over `runs` fresh instances; run r uses the
// derived stream ("coverage", {n, d, r}).
CoverageResult epsilon_coverage(int64_t n, int d, double epsilon, int runs,
                                uint64_t seed);

// Two-class Gaussian mixture classification, exact vs epsilon-approximate.
// Training points: the first n_train/2 are class 0 centered at
// +separation/2 on the first axis, the rest class 1 centered at
// -separation/2. Queries are drawn from the same mixture with a fair label
// coin. The exact path classifies by the exact nearest neighbor (random
// uniform tie-break); the approximate path classifies by
// select_representative over the epsilon candidate set with the configured
// policy. A WrongClass policy is re-targeted to each query's true label.
struct E2eConfig {
    int dim = 16;
    int64_t n_train = 2000;
    double separation = 2.0;
    double epsilon = 0.5;
    SelectionPolicy policy = SelectionPolicy::random_uniform();
    int64_t n_queries = 2000;
    uint64_t seed = 0;
};

struct E2eResult {
    double exact_error = 0.0;
    double approx_error = 0.0;
};

E2eResult e2e_classification(const E2eConfig& config);

// The fixed instance used by the perturbation checks: `duplicates` copies of
// the origin plus four decoys at distance 2 along the first four axes, on an
// integer grid in kPerturbationDim dimensions. The query of interest is the
// origin itself, so the duplicates are exactly tied at distance zero and the
// decoys can never win once everything moves by less than 1/4. Labels mark
// point 0 as the lone minority (label 1, everything else 0) for the
// adversarial variant.
inline constexpr int kPerturbationDim = 32;
Dataset perturbation_instance(int duplicates);

// Jitters the instance and the origin query by a fresh in-ball perturbation
// per draw (points first, then the query; draw t uses stream ("perturb",
// {t})) and tallies which duplicate wins under exact nearest neighbor with
// first-index tie-break. Passes when the winner histogram is consistent with
// uniform at chi-square p > 1e-3.
struct PerturbCheckResult {
    int duplicates = 0;
    int64_t draws = 0;
    double amplitude = 0.0;
    std::vector<int64_t> counts;  // wins per duplicate
    double chi_square = 0.0;
    double p_value = 0.0;
    bool pass = false;
};

PerturbCheckResult perturbation_uniformity_check(int duplicates, int64_t draws,
                                                 double amplitude,
                                                 uint64_t seed);

// The same instance attacked through the epsilon candidate set: draw t uses
// stream ("perturb-adversarial", {t}), the selector is MinorityClass, and
// counts cover every dataset point (duplicates first, then decoys).
// minority_rate is how often the lone minority-labeled duplicate is
// returned; the chi-square fields test the duplicate bins against uniform
// exactly as in the uniformity check, which the adversarial selection is
// expected to fail.
struct PerturbAdversarialResult {
    int duplicates = 0;
    int64_t draws = 0;
    double amplitude = 0.0;
    double epsilon = 0.0;
    std::vector<int64_t> counts;  // selections per dataset point
    double minority_rate = 0.0;
    double chi_square = 0.0;
    double p_value = 0.0;
    bool uniform_pass = false;
};

PerturbAdversarialResult perturbation_adversarial_check(int duplicates,
                                                        int64_t draws,
                                                        double amplitude,
                                                        double epsilon,
                                                        uint64_t seed);

// Mean epsilon-candidate-set size vs the (deterministic) fractile candidate
// count max(1, ceil(fractile*n)), per dimension, on fresh Gaussian
// instances; run r of dimension d uses stream ("fractile-compare", {d, r}).
struct FractileCompareRow {
    int d = 0;
    int64_t n = 0;
    double epsilon = 0.0;
    double fractile = 0.0;
    double mean_eps_candidates = 0.0;
    double fractile_candidates = 0.0;
};

std::vector<FractileCompareRow> fractile_vs_epsilon_comparison(
    const std::vector<int>& dims, int64_t n, double epsilon, double fractile,
    int runs, uint64_t seed);

}  // namespace nnlab
