#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nnlab/rng.hpp"

namespace nnlab {

// A single vector; standalone query points use this alias.
using Point = std::vector<double>;

// Fixed-dimension point collection with optional class labels. Coordinates
// are stored flat row-major. Immutable after construction.
class Dataset {
public:
    Dataset() = default;

    // coords.size() must be a multiple of dim; labels, when present, must
    // have one entry per point with non-negative values.
    Dataset(int dim, std::vector<double> coords,
            std::optional<std::vector<int>> labels = std::nullopt);

    int dim() const { return dim_; }
    int64_t size() const {
        return dim_ == 0 ? 0 : static_cast<int64_t>(coords_.size()) / dim_;
    }

    std::span<const double> point(int64_t i) const {
        return {coords_.data() + i * dim_, static_cast<size_t>(dim_)};
    }

    const std::vector<double>& coords() const { return coords_; }

    bool labeled() const { return labels_.has_value(); }
    const std::vector<int>& labels() const { return *labels_; }

    // Throws if any coordinate is NaN or infinite.
    void check_finite() const;

private:
    int dim_ = 0;
    std::vector<double> coords_;
    std::optional<std::vector<int>> labels_;
};

// n i.i.d. points with standard normal coordinates. Coordinates are drawn in
// row-major order (point 0 first), so the layout is part of the determinism
// contract.
Dataset gaussian_dataset(int64_t n, int dim, RngStream& rng);

// n points with integer coordinates uniform on {0, ..., extent-1}^dim.
// Duplicate points are expected for small grids; that is the point of the
// sampler.
Dataset grid_dataset(int64_t n, int dim, int extent, RngStream& rng);

}  // namespace nnlab
