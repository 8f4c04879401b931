#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "effdim/autodiff.hpp"
#include "effdim/network.hpp"

namespace effdim {

enum class AttackKind { fgsm, pgd, pgd_strong, gaussian, none };

struct AttackConfig {
    AttackKind kind = AttackKind::pgd;
    double epsilon = 0.0;  // l-inf radius, input units
    double sigma = 0.0;    // gaussian std
    int steps = 40;
    double step_size = 0.0;  // <= 0 means 2.5 * epsilon / steps
    int restarts = 5;
    std::uint64_t seed = 0;

    double effective_step() const {
        return step_size > 0.0 ? step_size : 2.5 * epsilon / steps;
    }
};

struct RobustnessRecord {
    double clean_accuracy = 0.0;                 // p
    double attacked_accuracy = 0.0;              // p*
    std::optional<double> relative_performance;  // p_r = p*/p, empty when p == 0
    AttackConfig attack;
    int n_evaluated = 0;
};

std::string attack_name(AttackKind k);

// single-sample perturbations; inputs and outputs stay inside [0,1]^d and
// the epsilon-ball around x
Tensor fgsm(const Network& net, const Tensor& x, int y, double epsilon);
Tensor pgd(const Network& net, const Tensor& x, int y, const AttackConfig& cfg,
           std::uint64_t sample_seed);
Tensor gaussian_perturb(const Tensor& x, double sigma, std::uint64_t seed);

RobustnessRecord evaluate_robustness(const Network& net, const Dataset& test,
                                     const AttackConfig& config);

// Nested-budget grid sweep: the candidate set at budget i includes the best
// candidate from every smaller budget, so attacked accuracy is exactly
// non-increasing along the grid. Budgets are epsilons for fgsm/pgd/pgd-strong
// and sigmas for gaussian (gaussian draws are independent per sigma).
std::vector<RobustnessRecord> grid_evaluate(const Network& net,
                                            const Dataset& test,
                                            AttackKind kind,
                                            std::span<const double> budgets,
                                            const AttackConfig& base);

}  // namespace effdim
