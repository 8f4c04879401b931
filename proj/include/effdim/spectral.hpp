#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "effdim/autodiff.hpp"
#include "effdim/network.hpp"

namespace effdim {

struct Spectrum {
    std::vector<double> eigenvalues;  // sorted descending
    int k = 0;
    bool breakdown = false;
    double neg_mass_fraction = 0.0;  // sum |min(l,0)| / sum |l|
    int hvp_data_size = 0;
    std::uint64_t seed = 0;
    double tail_bound = 0.0;  // k * l_k / (l_k + z), worst-case truncation term
};

struct EffDimConfig {
    double z = 1.0;
    int k = 100;            // effective k is min(k, P)
    int hvp_subset = 1000;  // effective size is min(subset, |test|)
    std::uint64_t seed = 0;
};

using LinearOperator =
    std::function<void(std::span<const double>, std::span<double>)>;

// k-step Lanczos with full reorthogonalization; Ritz values of the
// tridiagonal matrix, sorted descending. Breakdown (beta < 1e-12) returns
// the values computed so far with the breakdown flag set.
Spectrum lanczos_eigs(const LinearOperator& op, int dim, int k,
                      std::uint64_t seed);

double effective_dimensionality(std::span<const double> eigenvalues, double z);
double effective_dimensionality(const Spectrum& spectrum, double z);

// Hessian of the mean test loss through exact HVPs on a fixed seed-selected
// subset, fed to Lanczos.
Spectrum hessian_spectrum(const Network& net, const Dataset& test_set,
                          const EffDimConfig& config);

// deterministic subset used by hessian_spectrum, exposed for oracle tests
std::vector<const Sample*> hessian_subset(const Dataset& test_set,
                                          const EffDimConfig& config);

void save_spectrum_csv(const Spectrum& s, const std::string& csv_path,
                       const std::string& json_sidecar_path,
                       const EffDimConfig& config);

}  // namespace effdim
