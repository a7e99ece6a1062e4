#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "nnlab/dataset.hpp"
#include "nnlab/distance.hpp"

namespace nnlab {

struct LshParams {
    int hashes_per_table = 8;   // k
    int num_tables = 16;        // L
    double bucket_width = 1.0;  // w
    uint64_t seed = 0;
};

// p-stable Euclidean LSH index: each table hashes a point through k
// quantized random projections h(v) = floor((a.v + b) / w) and files it under
// the concatenation of the k values. The composite bucket key is the k hash
// values serialized as fixed-width little-endian 64-bit integers, which is
// injective for a fixed k; no secondary hashing, so bucket collisions are
// exact key matches.
//
// The index stores a pointer to the dataset it was built from; the dataset
// must outlive the index.
class LshIndex {
public:
    using Table = std::unordered_map<std::string, std::vector<int64_t>>;

    LshIndex(const Dataset& ds, const LshParams& params);

    const LshParams& params() const { return params_; }
    const Dataset& dataset() const { return *dataset_; }
    const std::vector<Table>& tables() const { return tables_; }

    // Direction vector for hash j of table t.
    std::span<const double> projection(int table, int hash) const;
    double offset(int table, int hash) const;

    // Composite bucket key of point v in the given table.
    std::string bucket_key(int table, std::span<const double> v) const;

    int64_t total_entries() const;

private:
    LshParams params_;
    const Dataset* dataset_;
    int dim_;
    std::vector<double> projections_;  // (L * k) x dim, flat
    std::vector<double> offsets_;      // L * k
    std::vector<Table> tables_;
};

// One p-stable hash evaluation: floor((direction . v + offset) / w).
int64_t hash_point(std::span<const double> v, std::span<const double> direction,
                   double offset, double w);

// Builds the index; deterministic given (ds, params). Throws on an empty
// dataset or invalid params. Projections and offsets for table t come from a
// fixed position in the seed's derived streams, so with k, w, and seed held
// fixed, an index with more tables contains the smaller index's tables as a
// prefix — uncapped query candidate sets therefore grow monotonically with
// the table count.
LshIndex build_lsh_index(const Dataset& ds, const LshParams& params);

// Unions the query's buckets across all tables (dedup, table order), keeps at
// most max_candidates, and returns the candidate of minimum true L2 distance
// (ties toward the smaller index), or nothing when every bucket is empty. The
// reported distance is always the re-computed exact distance, never a hashed
// approximation.
std::optional<DistanceRecord> lsh_query(const LshIndex& index,
                                        std::span<const double> q,
                                        int64_t max_candidates);

// Default bucket width: kBucketWidthScale times the median exact
// nearest-neighbor distance of an evenly-strided subsample of up to 100
// points (each matched against the full dataset). The scale follows the
// w ~ 4R convention of p-stable LSH tuning, widened further because recall
// on concentrated high-dimensional data keeps improving with w; see the
// lsh-bench sweep for the measured trade-off.
inline constexpr double kBucketWidthScale = 6.0;
double default_bucket_width(const Dataset& ds);

struct LshSweepRow {
    LshParams params;
    int64_t max_candidates = 0;
    double recall_at_1 = 0.0;        // fraction answering with an exact NN
    double mean_candidates = 0.0;    // mean scanned candidates per query
    double mean_distance_ratio = 0.0;  // mean answer distance / exact rho
};

// Measures recall@1 and effort per parameter setting against the exact
// linear-scan answer. max_candidates <= 0 means "no cap" (the dataset size).
std::vector<LshSweepRow> lsh_recall_sweep(const Dataset& ds,
                                          const std::vector<Point>& queries,
                                          std::span<const LshParams> grid,
                                          int64_t max_candidates = 0);

}  // namespace nnlab
