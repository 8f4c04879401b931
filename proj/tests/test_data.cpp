#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

#include "effdim/data.hpp"
#include "test_util.hpp"

using namespace effdim;

TEST_CASE("two moons: noiseless class-0 points lie on the unit semicircle") {
    Dataset ds = generate_two_moons(200, 0.0, 9);
    for (const auto& s : ds.samples) {
        if (s.label != 0) continue;
        auto [x, y] = two_moons_from_unit(s.input.data[0], s.input.data[1]);
        CHECK(std::fabs(x * x + y * y - 1.0) <= 1e-12);
        CHECK(y >= -1e-12);
    }
}

TEST_CASE("two moons: same (n, noise, seed) gives identical datasets") {
    Dataset a = generate_two_moons(100, 0.2, 5);
    Dataset b = generate_two_moons(100, 0.2, 5);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.samples[i].label == b.samples[i].label);
        CHECK(a.samples[i].input.data == b.samples[i].input.data);
    }
}

TEST_CASE("two moons: odd n is rejected") {
    CHECK_THROWS_AS(generate_two_moons(101, 0.1, 1), ValueError);
}

TEST_CASE("two moons: jitter standard deviation tracks the noise parameter") {
    const double noise = 0.1;
    const int n = 2000, m = n / 2;
    Dataset noisy = generate_two_moons(n, noise, 77);
    Dataset clean = generate_two_moons(n, 0.0, 77);
    double ss = 0.0;
    int cnt = 0;
    for (std::size_t i = 0; i < noisy.samples.size(); ++i) {
        auto [xn, yn] = two_moons_from_unit(noisy.samples[i].input.data[0],
                                            noisy.samples[i].input.data[1]);
        auto [xc, yc] = two_moons_from_unit(clean.samples[i].input.data[0],
                                            clean.samples[i].input.data[1]);
        ss += (xn - xc) * (xn - xc) + (yn - yc) * (yn - yc);
        cnt += 2;
    }
    double sd = std::sqrt(ss / cnt);
    CHECK(sd == doctest::Approx(noise).epsilon(0.10));
    (void)m;
}

TEST_CASE("blobs: zero spread collapses onto the class centers") {
    Dataset ds = generate_blobs(30, 3, 0.0, 1);
    std::map<int, std::vector<double>> first;
    for (const auto& s : ds.samples) {
        auto it = first.find(s.label);
        if (it == first.end())
            first[s.label] = s.input.data;
        else
            CHECK(s.input.data == it->second);
    }
    CHECK(first.size() == 3);
}

TEST_CASE("blobs: empirical class means converge to the centers") {
    const int n = 3000, classes = 3;
    const double spread = 0.05;
    Dataset ds = generate_blobs(n, classes, spread, 13);
    Dataset centers = generate_blobs(classes, classes, 0.0, 13);
    std::vector<double> mx(classes, 0.0), my(classes, 0.0);
    std::vector<int> cnt(classes, 0);
    for (const auto& s : ds.samples) {
        mx[s.label] += s.input.data[0];
        my[s.label] += s.input.data[1];
        cnt[s.label]++;
    }
    for (int c = 0; c < classes; ++c) {
        double tol = 3.0 * spread / std::sqrt(static_cast<double>(cnt[c]));
        CHECK(std::fabs(mx[c] / cnt[c] - centers.samples[c].input.data[0]) <= tol);
        CHECK(std::fabs(my[c] / cnt[c] - centers.samples[c].input.data[1]) <= tol);
    }
}

TEST_CASE("blobs: fewer than two classes rejected") {
    CHECK_THROWS_AS(generate_blobs(10, 1, 0.1, 1), ValueError);
}

TEST_CASE("property: generated inputs always lie in [0,1]^d") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        for (const Dataset& ds :
             {generate_two_moons(200, 0.3, seed),
              generate_blobs(200, 4, 0.3, seed),
              generate_blob_images(20, 4, 0.3, seed, 12)}) {
            for (const auto& s : ds.samples)
                for (double v : s.input.data) {
                    CHECK(v >= 0.0);
                    CHECK(v <= 1.0);
                }
        }
    }
}

namespace {

std::filesystem::path write_bytes(const std::string& name,
                                  const std::vector<unsigned char>& bytes) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    return p;
}

}  // namespace

TEST_CASE("idx: hand-built 2-image file parses to the right shape and values") {
    // header 00 00 08 03, dims (2,2,2), payload 0..7 scaled by /255
    std::vector<unsigned char> bytes = {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2,
                                        0, 0, 0, 2, 0, 1, 2, 3, 4, 5, 6, 7};
    auto p = write_bytes("effdim_idx_ok.idx", bytes);
    Tensor t = load_idx(p.string());
    CHECK(t.shape == std::vector<int>{2, 2, 2});
    for (int i = 0; i < 8; ++i)
        CHECK(t.data[i] == doctest::Approx(i / 255.0).epsilon(1e-15));
    std::filesystem::remove(p);
}

TEST_CASE("idx: write/load round-trip") {
    Tensor t = Tensor::zeros({2, 3, 3});
    for (std::size_t i = 0; i < t.size(); ++i) t.data[i] = (i % 256) / 255.0;
    auto p = std::filesystem::temp_directory_path() / "effdim_idx_rt.idx";
    write_idx(p.string(), t);
    Tensor back = load_idx(p.string());
    CHECK(back.shape == t.shape);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(back.data[i] == t.data[i]);
    std::filesystem::remove(p);
}

TEST_CASE("idx: malformed files raise distinct errors") {
    auto bad_magic = write_bytes("effdim_idx_bm.idx",
                                 {1, 0, 8, 1, 0, 0, 0, 1, 42});
    CHECK_THROWS_AS(load_idx(bad_magic.string()), IdxBadMagicError);
    std::filesystem::remove(bad_magic);

    auto bad_type = write_bytes("effdim_idx_bt.idx",
                                {0, 0, 0x0D, 1, 0, 0, 0, 1, 42});
    CHECK_THROWS_AS(load_idx(bad_type.string()), IdxUnsupportedTypeError);
    std::filesystem::remove(bad_type);

    auto truncated = write_bytes("effdim_idx_tr.idx",
                                 {0, 0, 8, 2, 0, 0, 0, 2, 0, 0, 0, 2, 1, 2});
    CHECK_THROWS_AS(load_idx(truncated.string()), IdxTruncatedError);
    std::filesystem::remove(truncated);
}

TEST_CASE("idx: all-zero payload gives an all-zero tensor") {
    auto p = write_bytes("effdim_idx_z.idx",
                         {0, 0, 8, 1, 0, 0, 0, 4, 0, 0, 0, 0});
    Tensor t = load_idx(p.string());
    for (double v : t.data) CHECK(v == 0.0);
    std::filesystem::remove(p);
}

TEST_CASE("split: stratified 50/50 on balanced data") {
    Dataset ds = testutil::random_dataset(100, 2, 2, 3);  // labels alternate
    auto [train, test] = split(ds, 0.5, 11);
    CHECK(train.size() == 50);
    CHECK(test.size() == 50);
    int c0 = 0;
    for (const auto& s : test.samples)
        if (s.label == 0) ++c0;
    CHECK(c0 == 25);
    CHECK(train.split == Split::train);
    CHECK(test.split == Split::test);
}

TEST_CASE("split: union of the two sides equals the input as a multiset") {
    Dataset ds = testutil::random_dataset(41, 2, 3, 4);
    auto [train, test] = split(ds, 0.3, 5);
    CHECK(train.size() + test.size() == ds.size());
    std::multiset<std::pair<double, double>> in, out;
    for (const auto& s : ds.samples)
        in.insert({s.input.data[0], s.input.data[1]});
    for (const auto& s : train.samples)
        out.insert({s.input.data[0], s.input.data[1]});
    for (const auto& s : test.samples)
        out.insert({s.input.data[0], s.input.data[1]});
    CHECK(in == out);
}

TEST_CASE("split: seed determinism and variability") {
    Dataset ds = testutil::random_dataset(60, 2, 2, 6);
    auto [a1, b1] = split(ds, 0.4, 100);
    auto [a2, b2] = split(ds, 0.4, 100);
    auto [a3, b3] = split(ds, 0.4, 101);
    REQUIRE(b1.size() == b2.size());
    bool same = true, diff = false;
    for (std::size_t i = 0; i < b1.size(); ++i) {
        if (b1.samples[i].input.data != b2.samples[i].input.data) same = false;
        if (i < b3.size() && b1.samples[i].input.data != b3.samples[i].input.data)
            diff = true;
    }
    CHECK(same);
    CHECK(diff);
}

TEST_CASE("split: fraction out of range rejected") {
    Dataset ds = testutil::random_dataset(10, 2, 2, 7);
    CHECK_THROWS_AS(split(ds, 0.0, 1), ValueError);
    CHECK_THROWS_AS(split(ds, 1.0, 1), ValueError);
}
