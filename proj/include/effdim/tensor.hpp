#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace effdim {

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValueError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense row-major real array. The universal value carrier at module
// boundaries; hot loops work on the raw data() directly.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<int> s, std::vector<double> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (size_from_shape(shape) != data.size())
            throw ShapeError("tensor: shape/data length mismatch");
    }

    static std::size_t size_from_shape(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int d : s) {
            if (d < 0) throw ShapeError("tensor: negative dimension");
            n *= static_cast<std::size_t>(d);
        }
        return n;
    }

    static Tensor zeros(std::vector<int> s) {
        std::size_t n = size_from_shape(s);
        return Tensor{std::move(s), std::vector<double>(n, 0.0)};
    }

    // construction from untrusted values: rejects NaN/Inf
    static Tensor from_values(std::vector<int> s, std::vector<double> d) {
        for (double v : d)
            if (!std::isfinite(v)) throw ValueError("tensor: non-finite value");
        return Tensor{std::move(s), std::move(d)};
    }

    std::size_t size() const { return data.size(); }
};

struct Sample {
    Tensor input;  // values in [0,1]
    int label = 0;
};

enum class Split { train, test };

struct Dataset {
    std::vector<Sample> samples;
    Split split = Split::train;
    int class_count = 0;

    std::size_t size() const { return samples.size(); }

    std::vector<const Sample*> pointers() const {
        std::vector<const Sample*> p;
        p.reserve(samples.size());
        for (const auto& s : samples) p.push_back(&s);
        return p;
    }
};

}  // namespace effdim
