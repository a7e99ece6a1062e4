#include "nnlab/dataset.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nnlab {

Dataset::Dataset(int dim, std::vector<double> coords,
                 std::optional<std::vector<int>> labels)
    : dim_(dim), coords_(std::move(coords)), labels_(std::move(labels)) {
    if (dim_ < 1) {
        throw std::invalid_argument("Dataset: dim must be >= 1");
    }
    if (coords_.size() % static_cast<size_t>(dim_) != 0) {
        throw std::invalid_argument(
            "Dataset: coordinate count " + std::to_string(coords_.size()) +
            " is not a multiple of dim " + std::to_string(dim_));
    }
    if (labels_) {
        if (labels_->size() != coords_.size() / static_cast<size_t>(dim_)) {
            throw std::invalid_argument(
                "Dataset: label count " + std::to_string(labels_->size()) +
                " does not match point count " +
                std::to_string(coords_.size() / static_cast<size_t>(dim_)));
        }
        for (int label : *labels_) {
            if (label < 0) {
                throw std::invalid_argument(
                    "Dataset: labels must be non-negative");
            }
        }
    }
}

void Dataset::check_finite() const {
    for (size_t i = 0; i < coords_.size(); ++i) {
        if (!std::isfinite(coords_[i])) {
            throw std::invalid_argument(
                "Dataset: non-finite coordinate at flat index " +
                std::to_string(i));
        }
    }
}

Dataset gaussian_dataset(int64_t n, int dim, RngStream& rng) {
    if (n < 0) {
        throw std::invalid_argument("gaussian_dataset: n must be >= 0");
    }
    if (dim < 1) {
        throw std::invalid_argument("gaussian_dataset: dim must be >= 1");
    }
    std::vector<double> coords(static_cast<size_t>(n) * dim);
    for (double& c : coords) {
        c = rng.normal();
    }
    return Dataset(dim, std::move(coords));
}

Dataset grid_dataset(int64_t n, int dim, int extent, RngStream& rng) {
    if (n < 0) {
        throw std::invalid_argument("grid_dataset: n must be >= 0");
    }
    if (dim < 1) {
        throw std::invalid_argument("grid_dataset: dim must be >= 1");
    }
    if (extent < 1) {
        throw std::invalid_argument("grid_dataset: extent must be >= 1");
    }
    std::vector<double> coords(static_cast<size_t>(n) * dim);
    for (double& c : coords) {
        c = static_cast<double>(rng.uniform_int(static_cast<uint64_t>(extent)));
    }
    return Dataset(dim, std::move(coords));
}

}  // namespace nnlab
