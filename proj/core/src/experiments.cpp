#include "nnlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "nnlab/distance.hpp"
#include "nnlab/parallel.hpp"

namespace nnlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_cell(int64_t n, int d) {
    if (n < 1) throw std::invalid_argument("experiments: n must be >= 1");
    if (d < 1) throw std::invalid_argument("experiments: d must be >= 1");
}

// Generates the instance for one concentration/coverage run and reports the
// squared distances' extremes. Database first (row by row), then the query,
// so every consumer of a run stream sees identical data.
template <typename Coord>
void ratio_run_extremes(int64_t n, int d, RngStream& rng, double& min_sq_out,
                        double& max_sq_out) {
    std::vector<Coord> db(static_cast<size_t>(n) * d);
    for (auto& c : db) c = static_cast<Coord>(rng.normal());
    std::vector<Coord> query(static_cast<size_t>(d));
    for (auto& c : query) c = static_cast<Coord>(rng.normal());

    double min_sq = std::numeric_limits<double>::infinity();
    double max_sq = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        const Coord* row = db.data() + static_cast<size_t>(i) * d;
        double sq = 0.0;
        for (int j = 0; j < d; ++j) {
            double diff = static_cast<double>(row[j]) -
                          static_cast<double>(query[j]);
            sq += diff * diff;
        }
        min_sq = std::min(min_sq, sq);
        max_sq = std::max(max_sq, sq);
    }
    min_sq_out = min_sq;
    max_sq_out = max_sq;
}

double chi_square_p_value(double statistic, int degrees) {
    boost::math::chi_squared dist(static_cast<double>(degrees));
    return boost::math::cdf(boost::math::complement(dist, statistic));
}

// Uniformity of a winner histogram against equal expected counts.
void uniform_chi_square(std::span<const int64_t> counts, int bins,
                        int64_t draws, double& chi_square, double& p_value) {
    const double expected = static_cast<double>(draws) / bins;
    double stat = 0.0;
    for (int b = 0; b < bins; ++b) {
        double diff = static_cast<double>(counts[b]) - expected;
        stat += diff * diff / expected;
    }
    chi_square = stat;
    p_value = chi_square_p_value(stat, bins - 1);
}

}  // namespace

double quantile_linear(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        throw std::invalid_argument("quantile_linear: empty input");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("quantile_linear: p must lie in [0, 1]");
    }
    const size_t m = sorted.size();
    if (m == 1) return sorted[0];
    double h = p * static_cast<double>(m - 1);
    size_t lo = static_cast<size_t>(h);
    if (lo >= m - 1) return sorted[m - 1];
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double distance_ratio_run(int64_t n, int d, Precision precision,
                          RngStream& rng) {
    check_cell(n, d);
    double min_sq = 0.0;
    double max_sq = 0.0;
    if (precision == Precision::kFloat32) {
        ratio_run_extremes<float>(n, d, rng, min_sq, max_sq);
    } else {
        ratio_run_extremes<double>(n, d, rng, min_sq, max_sq);
    }
    if (min_sq == 0.0) {
        throw std::runtime_error(
            "distance_ratio_run: query coincides with a database point");
    }
    return std::sqrt(max_sq / min_sq);
}

std::vector<RatioStats> concentration_experiment(
    const ConcentrationConfig& config) {
    if (config.runs < 1) {
        throw std::invalid_argument("concentration: runs must be >= 1");
    }
    if (config.dims.empty() || config.sizes.empty()) {
        throw std::invalid_argument(
            "concentration: dims and sizes must be non-empty");
    }
    for (int d : config.dims) {
        if (d < 1) throw std::invalid_argument("concentration: dims must be >= 1");
    }
    for (int64_t n : config.sizes) {
        if (n < 1) throw std::invalid_argument("concentration: sizes must be >= 1");
    }

    const size_t coord_bytes =
        config.precision == Precision::kFloat32 ? sizeof(float) : sizeof(double);
    const int hw = config.max_threads > 0 ? config.max_threads
                                          : available_threads();

    std::vector<RatioStats> rows;
    rows.reserve(config.sizes.size() * config.dims.size());
    for (int64_t n : config.sizes) {
        for (int d : config.dims) {
            RatioStats stats;
            stats.n = n;
            stats.d = d;

            const uint64_t per_run_bytes =
                (static_cast<uint64_t>(n) + 1) * static_cast<uint64_t>(d) *
                coord_bytes;
            if (per_run_bytes > config.memory_budget_bytes) {
                // Over-budget cell: explicit skip marker, never silent.
                stats.runs = 0;
                stats.min = stats.q1 = stats.median = stats.q3 = stats.max =
                    stats.mean = kNaN;
                rows.push_back(stats);
                continue;
            }

            const bool big =
                n * static_cast<int64_t>(d) >= config.big_cell_coord_count;
            const int cell_runs =
                big ? std::min(config.runs, config.big_cell_runs) : config.runs;

            const int mem_cap = static_cast<int>(std::max<uint64_t>(
                1, config.memory_budget_bytes / per_run_bytes));
            const int workers = std::min(hw, mem_cap);

            std::vector<double> ratios(static_cast<size_t>(cell_runs));
            parallel_for(cell_runs, workers, [&](int64_t run) {
                RngStream rng(config.seed,
                              stream_id_for("concentration",
                                            {static_cast<uint64_t>(n),
                                             static_cast<uint64_t>(d),
                                             static_cast<uint64_t>(run)}));
                ratios[static_cast<size_t>(run)] =
                    distance_ratio_run(n, d, config.precision, rng);
            });

            double sum = 0.0;
            for (double r : ratios) sum += r;
            std::vector<double> sorted = ratios;
            std::sort(sorted.begin(), sorted.end());

            stats.runs = cell_runs;
            stats.min = sorted.front();
            stats.q1 = quantile_linear(sorted, 0.25);
            stats.median = quantile_linear(sorted, 0.5);
            stats.q3 = quantile_linear(sorted, 0.75);
            stats.max = sorted.back();
            stats.mean = sum / static_cast<double>(cell_runs);
            rows.push_back(stats);
        }
    }
    return rows;
}

double coverage_fraction_run(int64_t n, int d, double epsilon, RngStream& rng) {
    check_cell(n, d);
    if (!(epsilon >= 0.0)) {
        throw std::invalid_argument("coverage: epsilon must be >= 0");
    }
    Dataset ds = gaussian_dataset(n, d, rng);
    Point query(static_cast<size_t>(d));
    for (auto& c : query) c = rng.normal();
    NeighborQueryResult res = epsilon_candidate_set(ds, query, epsilon);
    return static_cast<double>(res.k_eps) / static_cast<double>(n);
}

CoverageResult epsilon_coverage(int64_t n, int d, double epsilon, int runs,
                                uint64_t seed) {
    if (runs < 1) throw std::invalid_argument("coverage: runs must be >= 1");
    double sum = 0.0;
    for (int run = 0; run < runs; ++run) {
        RngStream rng(seed, stream_id_for("coverage",
                                          {static_cast<uint64_t>(n),
                                           static_cast<uint64_t>(d),
                                           static_cast<uint64_t>(run)}));
        sum += coverage_fraction_run(n, d, epsilon, rng);
    }
    return CoverageResult{n, d, epsilon, runs,
                          sum / static_cast<double>(runs)};
}

E2eResult e2e_classification(const E2eConfig& config) {
    if (config.dim < 1) throw std::invalid_argument("e2e: dim must be >= 1");
    if (config.n_train < 2) {
        throw std::invalid_argument("e2e: n_train must be >= 2");
    }
    if (config.n_queries < 1) {
        throw std::invalid_argument("e2e: n_queries must be >= 1");
    }
    if (!(config.epsilon >= 0.0)) {
        throw std::invalid_argument("e2e: epsilon must be >= 0");
    }
    if (!(config.separation >= 0.0) || !std::isfinite(config.separation)) {
        throw std::invalid_argument("e2e: separation must be finite and >= 0");
    }

    const int dim = config.dim;
    const int64_t n = config.n_train;
    const double shift = config.separation / 2.0;

    RngStream train_rng(config.seed, stream_id_for("e2e/train", {}));
    std::vector<double> coords(static_cast<size_t>(n) * dim);
    std::vector<int> labels(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        const int label = i < n / 2 ? 0 : 1;
        labels[static_cast<size_t>(i)] = label;
        double* row = coords.data() + static_cast<size_t>(i) * dim;
        for (int j = 0; j < dim; ++j) row[j] = train_rng.normal();
        row[0] += label == 0 ? shift : -shift;
    }
    Dataset train(dim, std::move(coords), std::move(labels));

    RngStream exact_select(config.seed, stream_id_for("e2e/select-exact", {}));
    RngStream approx_select(config.seed,
                            stream_id_for("e2e/select-approx", {}));
    const SelectionPolicy exact_policy = SelectionPolicy::random_uniform();

    int64_t exact_wrong = 0;
    int64_t approx_wrong = 0;
    Point query(static_cast<size_t>(dim));
    for (int64_t qi = 0; qi < config.n_queries; ++qi) {
        RngStream query_rng(config.seed,
                            stream_id_for("e2e/query",
                                          {static_cast<uint64_t>(qi)}));
        const int true_label = static_cast<int>(query_rng.uniform_int(2));
        for (int j = 0; j < dim; ++j) query[j] = query_rng.normal();
        query[0] += true_label == 0 ? shift : -shift;

        NeighborQueryResult exact = exact_nn_set(train, query, 0.0);
        int64_t ei = select_representative(exact, exact_policy, train.labels(),
                                           exact_select);
        if (train.labels()[static_cast<size_t>(ei)] != true_label) {
            ++exact_wrong;
        }

        NeighborQueryResult approx =
            epsilon_candidate_set(train, query, config.epsilon);
        SelectionPolicy policy = config.policy;
        if (policy.kind == SelectionPolicy::Kind::kWrongClass) {
            policy.wrong_class_true_label = true_label;
        }
        int64_t ai = select_representative(approx, policy, train.labels(),
                                           approx_select);
        if (train.labels()[static_cast<size_t>(ai)] != true_label) {
            ++approx_wrong;
        }
    }

    const double nq = static_cast<double>(config.n_queries);
    return E2eResult{static_cast<double>(exact_wrong) / nq,
                     static_cast<double>(approx_wrong) / nq};
}

Dataset perturbation_instance(int duplicates) {
    if (duplicates < 2) {
        throw std::invalid_argument(
            "perturbation_instance: duplicates must be >= 2");
    }
    constexpr int kDecoys = 4;
    const int dim = kPerturbationDim;
    const int64_t total = duplicates + kDecoys;
    std::vector<double> coords(static_cast<size_t>(total) * dim, 0.0);
    for (int j = 0; j < kDecoys; ++j) {
        coords[(static_cast<size_t>(duplicates) + j) * dim + j] = 2.0;
    }
    std::vector<int> labels(static_cast<size_t>(total), 0);
    labels[0] = 1;
    return Dataset(dim, std::move(coords), std::move(labels));
}

PerturbCheckResult perturbation_uniformity_check(int duplicates, int64_t draws,
                                                 double amplitude,
                                                 uint64_t seed) {
    if (draws < 1) {
        throw std::invalid_argument("perturb-check: draws must be >= 1");
    }
    const Dataset base = perturbation_instance(duplicates);
    const Point origin(static_cast<size_t>(kPerturbationDim), 0.0);
    const SelectionPolicy first = SelectionPolicy::first_index();

    std::vector<int64_t> counts(static_cast<size_t>(duplicates), 0);
    for (int64_t t = 0; t < draws; ++t) {
        RngStream rng(seed,
                      stream_id_for("perturb", {static_cast<uint64_t>(t)}));
        Dataset jittered = perturb_grid_dataset(base, amplitude, rng);
        Point query = perturb_grid_point(origin, amplitude, rng);
        NeighborQueryResult res = exact_nn_set(jittered, query, 0.0);
        int64_t winner =
            select_representative(res, first, jittered.labels(), rng);
        if (winner >= duplicates) {
            // Decoys sit at distance >= 2 - 2*amplitude > 2*amplitude from
            // the query; a decoy win means the construction is broken.
            throw std::logic_error("perturb-check: a decoy won the draw");
        }
        ++counts[static_cast<size_t>(winner)];
    }

    PerturbCheckResult result;
    result.duplicates = duplicates;
    result.draws = draws;
    result.amplitude = amplitude;
    result.counts = std::move(counts);
    uniform_chi_square(result.counts, duplicates, draws, result.chi_square,
                       result.p_value);
    result.pass = result.p_value > 1e-3;
    return result;
}

PerturbAdversarialResult perturbation_adversarial_check(int duplicates,
                                                        int64_t draws,
                                                        double amplitude,
                                                        double epsilon,
                                                        uint64_t seed) {
    if (draws < 1) {
        throw std::invalid_argument("perturb-check: draws must be >= 1");
    }
    if (!(epsilon >= 0.0)) {
        throw std::invalid_argument("perturb-check: epsilon must be >= 0");
    }
    const Dataset base = perturbation_instance(duplicates);
    const Point origin(static_cast<size_t>(kPerturbationDim), 0.0);
    const SelectionPolicy minority = SelectionPolicy::minority_class();

    std::vector<int64_t> counts(static_cast<size_t>(base.size()), 0);
    for (int64_t t = 0; t < draws; ++t) {
        RngStream rng(seed, stream_id_for("perturb-adversarial",
                                          {static_cast<uint64_t>(t)}));
        Dataset jittered = perturb_grid_dataset(base, amplitude, rng);
        Point query = perturb_grid_point(origin, amplitude, rng);
        NeighborQueryResult res = epsilon_candidate_set(jittered, query, epsilon);
        int64_t selected =
            select_representative(res, minority, jittered.labels(), rng);
        ++counts[static_cast<size_t>(selected)];
    }

    PerturbAdversarialResult result;
    result.duplicates = duplicates;
    result.draws = draws;
    result.amplitude = amplitude;
    result.epsilon = epsilon;
    result.counts = std::move(counts);
    result.minority_rate =
        static_cast<double>(result.counts[0]) / static_cast<double>(draws);
    // Judge the duplicate bins against the same uniform null as the honest
    // check; adversarial selection is expected to flunk it.
    uniform_chi_square(result.counts, duplicates, draws, result.chi_square,
                       result.p_value);
    result.uniform_pass = result.p_value > 1e-3;
    return result;
}

std::vector<FractileCompareRow> fractile_vs_epsilon_comparison(
    const std::vector<int>& dims, int64_t n, double epsilon, double fractile,
    int runs, uint64_t seed) {
    if (dims.empty()) {
        throw std::invalid_argument("fractile-compare: dims must be non-empty");
    }
    if (n < 1) throw std::invalid_argument("fractile-compare: n must be >= 1");
    if (runs < 1) {
        throw std::invalid_argument("fractile-compare: runs must be >= 1");
    }
    if (!(epsilon >= 0.0)) {
        throw std::invalid_argument("fractile-compare: epsilon must be >= 0");
    }
    if (!(fractile > 0.0 && fractile <= 1.0)) {
        throw std::invalid_argument(
            "fractile-compare: fractile must lie in (0, 1]");
    }

    std::vector<FractileCompareRow> rows;
    rows.reserve(dims.size());
    for (int d : dims) {
        check_cell(n, d);
        double eps_sum = 0.0;
        double frac_sum = 0.0;
        for (int run = 0; run < runs; ++run) {
            RngStream rng(seed, stream_id_for("fractile-compare",
                                              {static_cast<uint64_t>(d),
                                               static_cast<uint64_t>(run)}));
            Dataset ds = gaussian_dataset(n, d, rng);
            Point query(static_cast<size_t>(d));
            for (auto& c : query) c = rng.normal();
            eps_sum += static_cast<double>(
                epsilon_candidate_set(ds, query, epsilon).k_eps);
            frac_sum += static_cast<double>(
                fractile_candidate_set(ds, query, fractile).candidates.size());
        }
        FractileCompareRow row;
        row.d = d;
        row.n = n;
        row.epsilon = epsilon;
        row.fractile = fractile;
        row.mean_eps_candidates = eps_sum / static_cast<double>(runs);
        row.fractile_candidates = frac_sum / static_cast<double>(runs);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace nnlab
