#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "effdim/attacks.hpp"
#include "effdim/autodiff.hpp"
#include "effdim/network.hpp"

namespace effdim {

struct TrainingDivergedError : std::runtime_error {
    int epoch;
    explicit TrainingDivergedError(int e)
        : std::runtime_error("training diverged (non-finite loss) at epoch " +
                             std::to_string(e)),
          epoch(e) {}
};

enum class TrainMethod { standard, at, trades };

struct TrainConfig {
    TrainMethod method = TrainMethod::standard;
    bool awp = false;
    bool extra_data = false;
    int epochs = 40;
    int batch_size = 32;
    double learning_rate = 0.1;
    double momentum = 0.9;
    double trades_beta = 6.0;
    double awp_gamma = 0.005;
    AttackConfig inner_attack;  // pgd, 10 steps for training
    std::uint64_t seed = 0;

    static AttackConfig default_inner(double epsilon) {
        AttackConfig a;
        a.kind = AttackKind::pgd;
        a.epsilon = epsilon;
        a.steps = 10;
        a.restarts = 1;
        return a;
    }
};

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> train_accuracy;
    std::vector<double> test_accuracy;
    double wall_seconds = 0.0;
};

std::string method_name(TrainMethod m);
TrainMethod method_from_name(const std::string& name);

// entry point dispatching on config.method; test_set drives the per-epoch
// test accuracy column and may be empty
TrainHistory train(Network& net, const Dataset& train_set,
                   const Dataset* test_set, const TrainConfig& config);

// batch-level pieces, exposed for direct testing
double trades_loss(const Network& net, Batch batch, double beta,
                   const AttackConfig& inner_attack, std::uint64_t batch_seed);

// gradient for the outer update with adversarially perturbed weights;
// theta itself is left unchanged
void awp_step(Network& net, Batch batch, double gamma,
              std::span<double> grad_out);

// scalar KL(p || q) over two discrete distributions
double kl_divergence(std::span<const double> p, std::span<const double> q);

using SampleGenerator = std::function<Dataset(int n, std::uint64_t seed)>;

// factor >= 1; adds (factor-1)*n samples from the generator (synthetic
// tracks) or from a held-out pool (image track)
Dataset with_extra_data(const Dataset& train_set, int factor,
                        std::uint64_t seed,
                        const SampleGenerator* generator = nullptr,
                        const Dataset* pool = nullptr);

}  // namespace effdim
