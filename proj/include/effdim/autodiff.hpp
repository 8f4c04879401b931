#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include "effdim/network.hpp"

namespace effdim {

struct NonFiniteError : std::runtime_error {
    std::size_t param_index;
    NonFiniteError(std::size_t idx)
        : std::runtime_error("non-finite value at parameter index " +
                             std::to_string(idx)),
          param_index(idx) {}
};

using Batch = std::span<const Sample* const>;

// ---- loss heads --------------------------------------------------------

template <class T>
void softmax_stable(std::span<const T> logits, std::span<T> probs) {
    double m = value_of(logits[0]);
    for (std::size_t i = 1; i < logits.size(); ++i)
        m = std::max(m, value_of(logits[i]));
    T denom(0.0);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = exp(logits[i] - T(m));
        denom += probs[i];
    }
    for (std::size_t i = 0; i < logits.size(); ++i)
        probs[i] = probs[i] / denom;
}

// -log softmax(logits)[label], computed via logsumexp
template <class T>
T cross_entropy_logits(std::span<const T> logits, int label) {
    double m = value_of(logits[0]);
    for (std::size_t i = 1; i < logits.size(); ++i)
        m = std::max(m, value_of(logits[i]));
    T sum(0.0);
    for (std::size_t i = 0; i < logits.size(); ++i)
        sum += exp(logits[i] - T(m));
    return T(m) + log(sum) - logits[static_cast<std::size_t>(label)];
}

// dCE/dlogits = softmax - onehot, scaled
template <class T>
void cross_entropy_backward(std::span<const T> logits, int label, T scale,
                            std::span<T> dlogits) {
    softmax_stable(logits, dlogits);
    dlogits[static_cast<std::size_t>(label)] -= T(1.0);
    for (auto& d : dlogits) d *= scale;
}

double cross_entropy(const Tensor& logits, int label);
int argmax_class(const Tensor& logits);
Tensor forward(const Network& net, const Tensor& input);
int predict(const Network& net, std::span<const double> x);

// ---- batch reductions --------------------------------------------------
//
// Batch sums are accumulated per fixed-size chunk and merged in chunk order,
// so results are bitwise identical for any OpenMP thread count. The *_serial
// variants are the plain-loop references used by tests and the benchmark.

inline constexpr int kReduceChunks = 16;

struct ChunkRange {
    std::size_t begin, end;
};

inline std::array<ChunkRange, kReduceChunks> make_chunks(std::size_t n) {
    std::array<ChunkRange, kReduceChunks> r{};
    std::size_t q = n / kReduceChunks, rem = n % kReduceChunks, pos = 0;
    for (int i = 0; i < kReduceChunks; ++i) {
        std::size_t len = q + (static_cast<std::size_t>(i) < rem ? 1 : 0);
        r[i] = {pos, pos + len};
        pos += len;
    }
    return r;
}

// mean cross-entropy over the batch; gradient of the mean into grad_out
double batch_grad(const Network& net, Batch batch, std::span<double> grad_out);
double batch_grad_serial(const Network& net, Batch batch, std::span<double> grad_out);

double batch_loss(const Network& net, Batch batch);
double batch_accuracy(const Network& net, Batch batch);

// exact H*v of the mean cross-entropy via dual-number parameters
void batch_hvp(const Network& net, Batch batch, std::span<const double> v,
               std::span<double> hv_out);
void batch_hvp_serial(const Network& net, Batch batch, std::span<const double> v,
                      std::span<double> hv_out);

// single-sample loss and input gradient (attack inner loop)
double loss_and_input_grad(const Network& net, std::span<const double> x,
                           int label, std::span<double> xgrad,
                           Workspace<double>& ws);
double sample_loss(const Network& net, std::span<const double> x, int label,
                   Workspace<double>& ws);

}  // namespace effdim
