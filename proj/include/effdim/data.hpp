#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "effdim/tensor.hpp"

namespace effdim {

struct IdxError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IdxBadMagicError : IdxError {
    using IdxError::IdxError;
};
struct IdxUnsupportedTypeError : IdxError {
    using IdxError::IdxError;
};
struct IdxTruncatedError : IdxError {
    using IdxError::IdxError;
};

// Two-moons raw coordinates live in roughly [-1,2] x [-0.5,1]; this fixed
// affine map places them inside the unit square with margin for jitter.
// Exposed so tests can recover pre-rescale coordinates.
inline std::pair<double, double> two_moons_to_unit(double x, double y) {
    return {(x + 1.5) / 4.0, (y + 1.0) / 3.0};
}
inline std::pair<double, double> two_moons_from_unit(double u, double v) {
    return {u * 4.0 - 1.5, v * 3.0 - 1.0};
}

Dataset generate_two_moons(int n, double noise, std::uint64_t seed);
Dataset generate_blobs(int n, int classes, double spread, std::uint64_t seed);

// synthetic image track: one bright Gaussian bump per class, centers on a
// circle, with per-sample position jitter and pixel noise
Dataset generate_blob_images(int n, int classes, double noise,
                             std::uint64_t seed, int side = 28);

Tensor load_idx(const std::string& path);
void write_idx(const std::string& path, const Tensor& t);  // ubyte, round(v*255)

// pairs an IDX image file with an IDX label file; limit <= 0 keeps all
Dataset load_idx_dataset(const std::string& images_path,
                         const std::string& labels_path, int class_count,
                         int limit = 0);

std::pair<Dataset, Dataset> split(const Dataset& dataset, double test_fraction,
                                  std::uint64_t seed);

}  // namespace effdim
