#include "effdim/autodiff.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace effdim {

double cross_entropy(const Tensor& logits, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= logits.size())
        throw ValueError("cross_entropy: label " + std::to_string(label) +
                         " out of range for " + std::to_string(logits.size()) +
                         " classes");
    return cross_entropy_logits<double>(logits.data, label);
}

int argmax_class(const Tensor& logits) {
    if (logits.size() == 0) throw ValueError("argmax_class: empty logits");
    int best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i)
        if (logits.data[i] > logits.data[best]) best = static_cast<int>(i);
    return best;
}

Tensor forward(const Network& net, const Tensor& input) {
    Workspace<double> ws;
    auto logits = forward_eval<double>(net, net.params, input.data, ws);
    return Tensor{{net.class_count()},
                  std::vector<double>(logits.begin(), logits.end())};
}

int predict(const Network& net, std::span<const double> x) {
    thread_local Workspace<double> ws;
    auto logits = forward_eval<double>(net, net.params, x, ws);
    int best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i)
        if (logits[i] > logits[best]) best = static_cast<int>(i);
    return best;
}

namespace {

// one sample: mean-scaled CE gradient accumulated into grad, returns loss
template <class T>
T sample_grad_accum(const Network& net, std::span<const T> params,
                    const Sample& s, double inv_n, Workspace<T>& ws,
                    std::vector<T>& dlogits, std::span<T> grad) {
    auto logits = forward_eval<T>(net, params, s.input.data, ws);
    T loss = cross_entropy_logits<T>(logits, s.label);
    cross_entropy_backward<T>(logits, s.label, T(inv_n), dlogits);
    backward_eval<T>(net, params, ws, dlogits, grad);
    return loss * T(inv_n);
}

template <class T>
double batch_grad_impl(const Network& net, std::span<const T> params,
                       Batch batch, std::span<T> grad_out, bool parallel) {
    if (batch.empty()) throw ValueError("gradient: empty batch");
    const std::size_t P = net.param_count();
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    std::fill(grad_out.begin(), grad_out.end(), T(0.0));

    if (!parallel) {
        Workspace<T> ws;
        std::vector<T> dlogits(net.class_count());
        T loss(0.0);
        for (const Sample* s : batch)
            loss += sample_grad_accum<T>(net, params, *s, inv_n, ws, dlogits,
                                         grad_out);
        return value_of(loss);
    }

    auto chunks = make_chunks(batch.size());
    std::vector<std::vector<T>> partial(kReduceChunks);
    std::array<T, kReduceChunks> losses{};
#pragma omp parallel for schedule(static, 1)
    for (int c = 0; c < kReduceChunks; ++c) {
        if (chunks[c].begin == chunks[c].end) continue;
        partial[c].assign(P, T(0.0));
        Workspace<T> ws;
        std::vector<T> dlogits(net.class_count());
        T loss(0.0);
        for (std::size_t i = chunks[c].begin; i < chunks[c].end; ++i)
            loss += sample_grad_accum<T>(net, params, *batch[i], inv_n, ws,
                                         dlogits, partial[c]);
        losses[c] = loss;
    }
    T loss(0.0);
    for (int c = 0; c < kReduceChunks; ++c) {
        loss += losses[c];
        if (partial[c].empty()) continue;
        for (std::size_t i = 0; i < P; ++i) grad_out[i] += partial[c][i];
    }
    return value_of(loss);
}

}  // namespace

double batch_grad(const Network& net, Batch batch, std::span<double> grad_out) {
    return batch_grad_impl<double>(net, net.params, batch, grad_out, true);
}

double batch_grad_serial(const Network& net, Batch batch,
                         std::span<double> grad_out) {
    return batch_grad_impl<double>(net, net.params, batch, grad_out, false);
}

double batch_loss(const Network& net, Batch batch) {
    if (batch.empty()) throw ValueError("batch_loss: empty batch");
    auto chunks = make_chunks(batch.size());
    std::array<double, kReduceChunks> partial{};
#pragma omp parallel for schedule(static, 1)
    for (int c = 0; c < kReduceChunks; ++c) {
        Workspace<double> ws;
        double acc = 0.0;
        for (std::size_t i = chunks[c].begin; i < chunks[c].end; ++i) {
            auto logits = forward_eval<double>(net, net.params,
                                               batch[i]->input.data, ws);
            acc += cross_entropy_logits<double>(logits, batch[i]->label);
        }
        partial[c] = acc;
    }
    double sum = 0.0;
    for (double p : partial) sum += p;
    return sum / static_cast<double>(batch.size());
}

double batch_accuracy(const Network& net, Batch batch) {
    if (batch.empty()) throw ValueError("batch_accuracy: empty batch");
    auto chunks = make_chunks(batch.size());
    std::array<long, kReduceChunks> hits{};
#pragma omp parallel for schedule(static, 1)
    for (int c = 0; c < kReduceChunks; ++c) {
        Workspace<double> ws;
        long h = 0;
        for (std::size_t i = chunks[c].begin; i < chunks[c].end; ++i) {
            auto logits = forward_eval<double>(net, net.params,
                                               batch[i]->input.data, ws);
            int best = 0;
            for (std::size_t j = 1; j < logits.size(); ++j)
                if (logits[j] > logits[best]) best = static_cast<int>(j);
            if (best == batch[i]->label) ++h;
        }
        hits[c] = h;
    }
    long total = 0;
    for (long h : hits) total += h;
    return static_cast<double>(total) / static_cast<double>(batch.size());
}

namespace {

void hvp_impl(const Network& net, Batch batch, std::span<const double> v,
              std::span<double> hv_out, bool parallel) {
    if (batch.empty()) throw ValueError("hvp: empty batch");
    const std::size_t P = net.param_count();
    if (v.size() != P) throw ShapeError("hvp: direction length != P");
    std::vector<Dual> params(P);
    for (std::size_t i = 0; i < P; ++i) {
        // relu masks non-finite activations, so check the source directly
        if (!std::isfinite(net.params[i])) throw NonFiniteError(i);
        params[i] = Dual(net.params[i], v[i]);
    }
    std::vector<Dual> grad(P);
    batch_grad_impl<Dual>(net, params, batch, grad, parallel);
    for (std::size_t i = 0; i < P; ++i) {
        if (!is_finite(grad[i])) throw NonFiniteError(i);
        hv_out[i] = grad[i].du;
    }
}

}  // namespace

void batch_hvp(const Network& net, Batch batch, std::span<const double> v,
               std::span<double> hv_out) {
    hvp_impl(net, batch, v, hv_out, true);
}

void batch_hvp_serial(const Network& net, Batch batch,
                      std::span<const double> v, std::span<double> hv_out) {
    hvp_impl(net, batch, v, hv_out, false);
}

double loss_and_input_grad(const Network& net, std::span<const double> x,
                           int label, std::span<double> xgrad,
                           Workspace<double>& ws) {
    auto logits = forward_eval<double>(net, net.params, x, ws);
    double loss = cross_entropy_logits<double>(logits, label);
    thread_local std::vector<double> dlogits;
    dlogits.resize(logits.size());
    cross_entropy_backward<double>(logits, label, 1.0, dlogits);
    backward_eval<double>(net, net.params, ws, dlogits, {}, xgrad);
    return loss;
}

double sample_loss(const Network& net, std::span<const double> x, int label,
                   Workspace<double>& ws) {
    auto logits = forward_eval<double>(net, net.params, x, ws);
    return cross_entropy_logits<double>(logits, label);
}

}  // namespace effdim
