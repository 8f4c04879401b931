#include "effdim/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "effdim/rng.hpp"

namespace effdim {

namespace {

double clip01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

void shuffle_indices(std::vector<int>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.uniform_int(static_cast<int>(i))]);
}

}  // namespace

Dataset generate_two_moons(int n, double noise, std::uint64_t seed) {
    if (n % 2 != 0) throw ValueError("generate_two_moons: n must be even");
    if (noise < 0.0) throw ValueError("generate_two_moons: negative noise");
    const int m = n / 2;
    Rng rng(mix64(seed, 0x2b00u));
    Dataset ds;
    ds.class_count = 2;
    ds.samples.reserve(n);
    for (int i = 0; i < m; ++i) {
        double t = m > 1 ? std::numbers::pi * i / (m - 1) : 0.0;
        // outer moon (class 0) on the upper unit semicircle
        double x0 = std::cos(t) + noise * rng.normal();
        double y0 = std::sin(t) + noise * rng.normal();
        // inner moon (class 1), shifted and reflected
        double x1 = 1.0 - std::cos(t) + noise * rng.normal();
        double y1 = 0.5 - std::sin(t) + noise * rng.normal();
        auto [u0, v0] = two_moons_to_unit(x0, y0);
        auto [u1, v1] = two_moons_to_unit(x1, y1);
        ds.samples.push_back({Tensor{{2}, {clip01(u0), clip01(v0)}}, 0});
        ds.samples.push_back({Tensor{{2}, {clip01(u1), clip01(v1)}}, 1});
    }
    return ds;
}

Dataset generate_blobs(int n, int classes, double spread, std::uint64_t seed) {
    if (classes < 2) throw ValueError("generate_blobs: classes must be >= 2");
    Rng rng(mix64(seed, 0xb10bu));
    Dataset ds;
    ds.class_count = classes;
    ds.samples.reserve(n);
    for (int i = 0; i < n; ++i) {
        int c = i % classes;
        double ang = 2.0 * std::numbers::pi * c / classes;
        double cx = 0.5 + 0.35 * std::cos(ang);
        double cy = 0.5 + 0.35 * std::sin(ang);
        double x = clip01(cx + spread * rng.normal());
        double y = clip01(cy + spread * rng.normal());
        ds.samples.push_back({Tensor{{2}, {x, y}}, c});
    }
    return ds;
}

Dataset generate_blob_images(int n, int classes, double noise,
                             std::uint64_t seed, int side) {
    if (classes < 2) throw ValueError("generate_blob_images: classes must be >= 2");
    Rng rng(mix64(seed, 0x1346u));
    Dataset ds;
    ds.class_count = classes;
    ds.samples.reserve(n);
    const double mid = (side - 1) / 2.0;
    const double ring = side * 0.28;
    const double bump_sigma = side * 0.11;
    for (int i = 0; i < n; ++i) {
        int c = i % classes;
        double ang = 2.0 * std::numbers::pi * c / classes;
        double cx = mid + ring * std::cos(ang) + 1.5 * rng.normal();
        double cy = mid + ring * std::sin(ang) + 1.5 * rng.normal();
        std::vector<double> px(static_cast<std::size_t>(side) * side);
        for (int r = 0; r < side; ++r)
            for (int q = 0; q < side; ++q) {
                double d2 = (r - cy) * (r - cy) + (q - cx) * (q - cx);
                double v = 0.75 * std::exp(-d2 / (2.0 * bump_sigma * bump_sigma));
                v += noise * rng.normal();
                px[static_cast<std::size_t>(r) * side + q] = clip01(v);
            }
        ds.samples.push_back({Tensor{{1, side, side}, std::move(px)}, c});
    }
    return ds;
}

namespace {

std::uint32_t read_be32(std::ifstream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw IdxTruncatedError("idx: truncated header in " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace

Tensor load_idx(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IdxError("idx: cannot open " + path);
    unsigned char hdr[4];
    in.read(reinterpret_cast<char*>(hdr), 4);
    if (!in) throw IdxTruncatedError("idx: truncated header in " + path);
    if (hdr[0] != 0 || hdr[1] != 0)
        throw IdxBadMagicError("idx: bad magic bytes in " + path);
    if (hdr[2] != 0x08)
        throw IdxUnsupportedTypeError(
            "idx: unsupported type code 0x" + std::to_string(hdr[2]) + " in " +
            path + " (only unsigned byte 0x08 supported)");
    int ndim = hdr[3];
    std::vector<int> shape(ndim);
    std::size_t count = 1;
    for (int i = 0; i < ndim; ++i) {
        shape[i] = static_cast<int>(read_be32(in, path));
        count *= static_cast<std::size_t>(shape[i]);
    }
    std::vector<unsigned char> raw(count);
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count)
        throw IdxTruncatedError("idx: payload shorter than header implies in " +
                                path);
    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i) data[i] = raw[i] / 255.0;
    return Tensor{std::move(shape), std::move(data)};
}

void write_idx(const std::string& path, const Tensor& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IdxError("idx: cannot open " + path + " for writing");
    unsigned char hdr[4] = {0, 0, 0x08, static_cast<unsigned char>(t.shape.size())};
    out.write(reinterpret_cast<char*>(hdr), 4);
    for (int d : t.shape) {
        unsigned char b[4] = {static_cast<unsigned char>((d >> 24) & 0xff),
                              static_cast<unsigned char>((d >> 16) & 0xff),
                              static_cast<unsigned char>((d >> 8) & 0xff),
                              static_cast<unsigned char>(d & 0xff)};
        out.write(reinterpret_cast<char*>(b), 4);
    }
    std::vector<unsigned char> raw(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        raw[i] = static_cast<unsigned char>(
            std::lround(clip01(t.data[i]) * 255.0));
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size()));
}

Dataset load_idx_dataset(const std::string& images_path,
                         const std::string& labels_path, int class_count,
                         int limit) {
    Tensor images = load_idx(images_path);
    Tensor labels = load_idx(labels_path);
    if (images.shape.size() < 2)
        throw IdxError("idx: image file must have >= 2 dimensions");
    if (labels.shape.size() != 1)
        throw IdxError("idx: label file must be 1-dimensional");
    int n = images.shape[0];
    if (labels.shape[0] != n)
        throw IdxError("idx: image/label count mismatch");
    if (limit > 0 && limit < n) n = limit;
    std::size_t per = images.size() / images.shape[0];
    std::vector<int> item_shape;  // leading 1 channel for conv input
    item_shape.push_back(1);
    for (std::size_t i = 1; i < images.shape.size(); ++i)
        item_shape.push_back(images.shape[i]);
    Dataset ds;
    ds.class_count = class_count;
    ds.samples.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::vector<double> px(images.data.begin() + static_cast<long>(i) * per,
                               images.data.begin() + static_cast<long>(i + 1) * per);
        int label = static_cast<int>(std::lround(labels.data[i] * 255.0));
        if (label < 0 || label >= class_count)
            throw IdxError("idx: label out of range");
        ds.samples.push_back({Tensor{item_shape, std::move(px)}, label});
    }
    return ds;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double test_fraction,
                                  std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ValueError("split: test_fraction must be in (0,1)");
    // stratified: shuffle within each class, round the per-class test share
    std::vector<std::vector<int>> by_class(dataset.class_count);
    for (std::size_t i = 0; i < dataset.samples.size(); ++i)
        by_class[dataset.samples[i].label].push_back(static_cast<int>(i));
    std::vector<int> test_idx, train_idx;
    for (int c = 0; c < dataset.class_count; ++c) {
        Rng rng(mix64(seed, 0x5b17u, static_cast<std::uint64_t>(c)));
        shuffle_indices(by_class[c], rng);
        int n_c = static_cast<int>(by_class[c].size());
        int t_c = static_cast<int>(std::lround(test_fraction * n_c));
        for (int i = 0; i < n_c; ++i)
            (i < t_c ? test_idx : train_idx).push_back(by_class[c][i]);
    }
    Rng rng(mix64(seed, 0x5b18u));
    shuffle_indices(train_idx, rng);
    shuffle_indices(test_idx, rng);
    auto build = [&](const std::vector<int>& idx, Split tag) {
        Dataset d;
        d.split = tag;
        d.class_count = dataset.class_count;
        d.samples.reserve(idx.size());
        for (int i : idx) d.samples.push_back(dataset.samples[i]);
        return d;
    };
    return {build(train_idx, Split::train), build(test_idx, Split::test)};
}

}  // namespace effdim
