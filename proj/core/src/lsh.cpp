#include "nnlab/lsh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <vector>

#include "nnlab/neighbors.hpp"
#include "nnlab/rng.hpp"

namespace nnlab {

namespace {

void validate_params(const LshParams& p) {
    if (p.hashes_per_table < 1) {
        throw std::invalid_argument("lsh: hashes_per_table must be >= 1");
    }
    if (p.num_tables < 1) {
        throw std::invalid_argument("lsh: num_tables must be >= 1");
    }
    if (!(p.bucket_width > 0.0) || !std::isfinite(p.bucket_width)) {
        throw std::invalid_argument("lsh: bucket_width must be finite and > 0");
    }
}

void append_le64(std::string& out, int64_t value) {
    uint64_t u = static_cast<uint64_t>(value);
    char bytes[8];
    for (int i = 0; i < 8; ++i) {
        bytes[i] = static_cast<char>((u >> (8 * i)) & 0xff);
    }
    out.append(bytes, 8);
}

}  // namespace

int64_t hash_point(std::span<const double> v, std::span<const double> direction,
                   double offset, double w) {
    if (v.size() != direction.size()) {
        throw std::invalid_argument("lsh: vector/direction dimension mismatch");
    }
    double dot = 0.0;
    for (size_t i = 0; i < v.size(); ++i) dot += v[i] * direction[i];
    return static_cast<int64_t>(std::floor((dot + offset) / w));
}

LshIndex::LshIndex(const Dataset& ds, const LshParams& params)
    : params_(params), dataset_(&ds), dim_(ds.dim()) {
    validate_params(params);
    if (ds.size() == 0) {
        throw std::invalid_argument("lsh: cannot index an empty dataset");
    }

    const int k = params.hashes_per_table;
    const int L = params.num_tables;

    // All randomness in the structure comes from these two streams, so the
    // index is a pure function of (dataset, params).
    RngStream proj_rng(params.seed, stream_id_for("lsh/projections", {}));
    RngStream off_rng(params.seed, stream_id_for("lsh/offsets", {}));

    projections_.resize(static_cast<size_t>(L) * k * dim_);
    for (auto& c : projections_) c = proj_rng.normal();
    offsets_.resize(static_cast<size_t>(L) * k);
    for (auto& b : offsets_) b = off_rng.uniform(0.0, params.bucket_width);

    tables_.resize(L);
    for (int t = 0; t < L; ++t) {
        tables_[t].reserve(static_cast<size_t>(ds.size()));
        for (int64_t i = 0; i < ds.size(); ++i) {
            tables_[t][bucket_key(t, ds.point(i))].push_back(i);
        }
    }
}

std::span<const double> LshIndex::projection(int table, int hash) const {
    size_t base =
        (static_cast<size_t>(table) * params_.hashes_per_table + hash) * dim_;
    return {projections_.data() + base, static_cast<size_t>(dim_)};
}

double LshIndex::offset(int table, int hash) const {
    return offsets_[static_cast<size_t>(table) * params_.hashes_per_table + hash];
}

std::string LshIndex::bucket_key(int table, std::span<const double> v) const {
    std::string key;
    key.reserve(static_cast<size_t>(params_.hashes_per_table) * 8);
    for (int j = 0; j < params_.hashes_per_table; ++j) {
        append_le64(key, hash_point(v, projection(table, j), offset(table, j),
                                    params_.bucket_width));
    }
    return key;
}

int64_t LshIndex::total_entries() const {
    int64_t total = 0;
    for (const auto& table : tables_) {
        for (const auto& [key, bucket] : table) {
            total += static_cast<int64_t>(bucket.size());
        }
    }
    return total;
}

LshIndex build_lsh_index(const Dataset& ds, const LshParams& params) {
    return LshIndex(ds, params);
}

std::optional<DistanceRecord> lsh_query(const LshIndex& index,
                                        std::span<const double> q,
                                        int64_t max_candidates) {
    const Dataset& ds = index.dataset();
    if (static_cast<int>(q.size()) != ds.dim()) {
        throw std::invalid_argument("lsh: query dimension mismatch");
    }
    if (max_candidates < 1) {
        throw std::invalid_argument("lsh: max_candidates must be >= 1");
    }

    // Union of the query's buckets, deduplicated, visited in table order so
    // a candidate cap truncates deterministically.
    std::vector<char> seen(static_cast<size_t>(ds.size()), 0);
    int64_t best_index = -1;
    double best_dist_sq = std::numeric_limits<double>::infinity();
    int64_t scanned = 0;

    const int L = index.params().num_tables;
    for (int t = 0; t < L && scanned < max_candidates; ++t) {
        auto it = index.tables()[t].find(index.bucket_key(t, q));
        if (it == index.tables()[t].end()) continue;
        for (int64_t i : it->second) {
            if (seen[static_cast<size_t>(i)]) continue;
            seen[static_cast<size_t>(i)] = 1;
            double d2 = l2_distance_sq_unchecked(q.data(), ds.point(i).data(),
                                                 ds.dim());
            if (d2 < best_dist_sq ||
                (d2 == best_dist_sq && i < best_index)) {
                best_dist_sq = d2;
                best_index = i;
            }
            if (++scanned >= max_candidates) break;
        }
    }

    if (best_index < 0) return std::nullopt;
    return DistanceRecord{best_index, std::sqrt(best_dist_sq)};
}

double default_bucket_width(const Dataset& ds) {
    if (ds.size() < 2) {
        throw std::invalid_argument(
            "lsh: need at least 2 points to derive a bucket width");
    }

    // Evenly strided subsample of at most 100 points; each one's exact NN
    // distance is measured against the full dataset (self excluded).
    const int64_t n = ds.size();
    const int64_t sample = std::min<int64_t>(n, 100);
    const int64_t stride = n / sample;

    std::vector<double> nn_dists;
    nn_dists.reserve(static_cast<size_t>(sample));
    for (int64_t s = 0; s < sample; ++s) {
        const int64_t i = s * stride;
        auto pi = ds.point(i);
        double best = std::numeric_limits<double>::infinity();
        for (int64_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double d2 = l2_distance_sq_unchecked(pi.data(), ds.point(j).data(),
                                                 ds.dim());
            best = std::min(best, d2);
        }
        nn_dists.push_back(std::sqrt(best));
    }

    std::sort(nn_dists.begin(), nn_dists.end());
    const size_t m = nn_dists.size();
    double median = (m % 2 == 1) ? nn_dists[m / 2]
                                 : 0.5 * (nn_dists[m / 2 - 1] + nn_dists[m / 2]);
    if (!(median > 0.0)) {
        throw std::runtime_error(
            "lsh: degenerate dataset, median neighbor distance is zero");
    }
    return kBucketWidthScale * median;
}

std::vector<LshSweepRow> lsh_recall_sweep(const Dataset& ds,
                                          const std::vector<Point>& queries,
                                          std::span<const LshParams> grid,
                                          int64_t max_candidates) {
    if (queries.empty()) {
        throw std::invalid_argument("lsh: sweep needs at least one query");
    }
    const int64_t cap = max_candidates > 0 ? max_candidates : ds.size();

    // Exact answers are shared across the grid.
    std::vector<double> exact_rho(queries.size());
    for (size_t qi = 0; qi < queries.size(); ++qi) {
        exact_rho[qi] = exact_nn_set(ds, queries[qi], kFloatTieTol).rho;
    }

    std::vector<LshSweepRow> rows;
    rows.reserve(grid.size());
    for (const LshParams& params : grid) {
        LshIndex index = build_lsh_index(ds, params);

        int64_t hits = 0;
        int64_t answered = 0;
        double candidate_sum = 0.0;
        double ratio_sum = 0.0;
        for (size_t qi = 0; qi < queries.size(); ++qi) {
            // Count scanned candidates the same way lsh_query does.
            std::vector<char> seen(static_cast<size_t>(ds.size()), 0);
            int64_t scanned = 0;
            for (int t = 0; t < params.num_tables && scanned < cap; ++t) {
                auto it = index.tables()[t].find(
                    index.bucket_key(t, queries[qi]));
                if (it == index.tables()[t].end()) continue;
                for (int64_t i : it->second) {
                    if (seen[static_cast<size_t>(i)]) continue;
                    seen[static_cast<size_t>(i)] = 1;
                    if (++scanned >= cap) break;
                }
            }
            candidate_sum += static_cast<double>(scanned);

            auto ans = lsh_query(index, queries[qi], cap);
            if (!ans) continue;
            ++answered;
            ratio_sum += ans->distance / exact_rho[qi];
            if (ans->distance <= exact_rho[qi] * (1.0 + kFloatTieTol)) ++hits;
        }

        LshSweepRow row;
        row.params = params;
        row.max_candidates = cap;
        row.recall_at_1 =
            static_cast<double>(hits) / static_cast<double>(queries.size());
        row.mean_candidates =
            candidate_sum / static_cast<double>(queries.size());
        row.mean_distance_ratio =
            answered > 0 ? ratio_sum / static_cast<double>(answered)
                         : std::numeric_limits<double>::quiet_NaN();
        rows.push_back(row);
    }
    return rows;
}

}  // namespace nnlab
