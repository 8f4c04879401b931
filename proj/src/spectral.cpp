#include "effdim/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "effdim/rng.hpp"

namespace effdim {

namespace {

constexpr double kBreakdownTol = 1e-12;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

Spectrum lanczos_eigs(const LinearOperator& op, int dim, int k,
                      std::uint64_t seed) {
    if (k < 1 || k > dim) throw ValueError("lanczos: need 1 <= k <= dim");
    const std::size_t n = static_cast<std::size_t>(dim);
    std::vector<std::vector<double>> q;
    q.reserve(static_cast<std::size_t>(k) + 1);

    std::vector<double> v(n);
    Rng rng(mix64(seed, 0x1a2cu));
    for (auto& x : v) x = rng.normal();
    double nrm = std::sqrt(dot(v, v));
    for (auto& x : v) x /= nrm;
    q.push_back(v);

    std::vector<double> alpha, beta;
    std::vector<double> w(n);
    bool breakdown = false;
    for (int j = 0; j < k; ++j) {
        op(q[j], w);
        double a = dot(q[j], w);
        alpha.push_back(a);
        for (std::size_t i = 0; i < n; ++i) w[i] -= a * q[j][i];
        if (j > 0)
            for (std::size_t i = 0; i < n; ++i)
                w[i] -= beta[j - 1] * q[j - 1][i];
        // full reorthogonalization, two passes
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i <= j; ++i) {
                double c = dot(q[i], w);
                for (std::size_t t = 0; t < n; ++t) w[t] -= c * q[i][t];
            }
        if (j + 1 == k) break;
        double b = std::sqrt(dot(w, w));
        if (b < kBreakdownTol) {
            breakdown = true;
            break;
        }
        beta.push_back(b);
        for (auto& x : w) x /= b;
        q.push_back(w);
    }

    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T,
                                                      Eigen::EigenvaluesOnly);
    Spectrum s;
    s.eigenvalues.assign(es.eigenvalues().data(),
                         es.eigenvalues().data() + m);
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), std::greater<>());
    s.k = m;
    s.breakdown = breakdown;
    s.seed = seed;
    return s;
}

double effective_dimensionality(std::span<const double> eigenvalues, double z) {
    if (!(z > 0.0)) throw ValueError("effective_dimensionality: z must be > 0");
    double acc = 0.0;
    for (double l : eigenvalues) {
        double lc = l > 0.0 ? l : 0.0;  // negative Ritz mass is clamped
        acc += lc / (lc + z);
    }
    return acc;
}

double effective_dimensionality(const Spectrum& spectrum, double z) {
    return effective_dimensionality(spectrum.eigenvalues, z);
}

std::vector<const Sample*> hessian_subset(const Dataset& test_set,
                                          const EffDimConfig& config) {
    if (test_set.samples.empty())
        throw ValueError("hessian_spectrum: empty test set");
    std::size_t m = std::min<std::size_t>(
        test_set.samples.size(),
        static_cast<std::size_t>(std::max(1, config.hvp_subset)));
    std::vector<int> idx(test_set.samples.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    Rng rng(mix64(config.seed, 0x5e17u));
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.uniform_int(static_cast<int>(i))]);
    std::vector<const Sample*> subset;
    subset.reserve(m);
    for (std::size_t i = 0; i < m; ++i)
        subset.push_back(&test_set.samples[idx[i]]);
    return subset;
}

Spectrum hessian_spectrum(const Network& net, const Dataset& test_set,
                          const EffDimConfig& config) {
    auto subset = hessian_subset(test_set, config);
    const int P = static_cast<int>(net.param_count());
    const int k = std::min(config.k, P);
    LinearOperator op = [&](std::span<const double> in, std::span<double> out) {
        batch_hvp(net, subset, in, out);
    };
    Spectrum s = lanczos_eigs(op, P, k, config.seed);
    s.hvp_data_size = static_cast<int>(subset.size());
    double neg = 0.0, tot = 0.0;
    for (double l : s.eigenvalues) {
        if (l < 0.0) neg += -l;
        tot += std::fabs(l);
    }
    s.neg_mass_fraction = tot > 0.0 ? neg / tot : 0.0;
    if (!s.eigenvalues.empty()) {
        double lk = std::max(0.0, s.eigenvalues.back());
        s.tail_bound = s.k * lk / (lk + config.z);
    }
    return s;
}

void save_spectrum_csv(const Spectrum& s, const std::string& csv_path,
                       const std::string& json_sidecar_path,
                       const EffDimConfig& config) {
    std::ofstream csv(csv_path, std::ios::binary);
    csv << "rank,eigenvalue\n";
    char buf[64];
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i + 1,
                      s.eigenvalues[i]);
        csv << buf;
    }
    nlohmann::ordered_json j;
    j["z"] = config.z;
    j["k"] = s.k;
    j["requested_k"] = config.k;
    j["seed"] = s.seed;
    j["hvp_data_size"] = s.hvp_data_size;
    j["breakdown"] = s.breakdown;
    j["neg_mass_fraction"] = s.neg_mass_fraction;
    j["tail_bound"] = s.tail_bound;
    j["eff_dim"] = effective_dimensionality(s, config.z);
    std::ofstream out(json_sidecar_path, std::ios::binary);
    out << j.dump(2) << "\n";
}

}  // namespace effdim
