#include "effdim/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "effdim/rng.hpp"

namespace effdim {

namespace {

void kl_from_logits(std::span<const double> clean_probs,
                    std::span<const double> adv_logits,
                    std::span<double> adv_probs, double& kl_out) {
    softmax_stable<double>(adv_logits, adv_probs);
    double kl = 0.0;
    for (std::size_t i = 0; i < clean_probs.size(); ++i)
        if (clean_probs[i] > 0.0)
            kl += clean_probs[i] * (std::log(clean_probs[i]) - std::log(adv_probs[i]));
    kl_out = kl;
}

// PGD on the KL term with fixed clean distribution; step acceptance as in
// the cross-entropy attack
void trades_inner_attack(const Network& net, const Sample& s,
                         std::span<const double> clean_probs,
                         const AttackConfig& inner, std::uint64_t seed,
                         std::vector<double>& x_adv) {
    const std::size_t d = s.input.size();
    x_adv.assign(s.input.data.begin(), s.input.data.end());
    if (inner.steps <= 0 || inner.epsilon <= 0.0) return;
    Workspace<double> ws;
    const int C = net.class_count();
    std::vector<double> adv_probs(C), dlogits(C), xgrad(d), cand(d);
    Rng rng(mix64(seed, 0x7d5u));
    for (std::size_t i = 0; i < d; ++i)
        x_adv[i] = s.input.data[i] + rng.uniform(-inner.epsilon, inner.epsilon);
    auto project = [&](std::span<double> v) {
        for (std::size_t i = 0; i < d; ++i) {
            double lo = std::max(0.0, s.input.data[i] - inner.epsilon);
            double hi = std::min(1.0, s.input.data[i] + inner.epsilon);
            v[i] = std::clamp(v[i], lo, hi);
        }
    };
    project(x_adv);
    auto kl_at = [&](std::span<const double> x, bool want_grad) {
        auto logits = forward_eval<double>(net, net.params, x, ws);
        double kl;
        kl_from_logits(clean_probs, logits, adv_probs, kl);
        if (want_grad) {
            for (int c = 0; c < C; ++c) dlogits[c] = adv_probs[c] - clean_probs[c];
            backward_eval<double>(net, net.params, ws, dlogits, {}, xgrad);
        }
        return kl;
    };
    double cur = kl_at(x_adv, false);
    const double alpha = inner.effective_step();
    for (int step = 0; step < inner.steps; ++step) {
        kl_at(x_adv, true);
        for (std::size_t i = 0; i < d; ++i) {
            double g = xgrad[i];
            double sg = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
            cand[i] = x_adv[i] + alpha * sg;
        }
        project(cand);
        double cl = kl_at(cand, false);
        if (cl >= cur) {
            std::swap(x_adv, cand);
            cur = cl;
        }
    }
}

// TRADES objective and its exact parameter gradient for one batch.
// Gradient flows through both the clean and the adversarial branch.
double trades_grad(const Network& net, Batch batch, double beta,
                   const AttackConfig& inner, std::uint64_t batch_seed,
                   std::span<double> grad_out) {
    if (batch.empty()) throw ValueError("trades: empty batch");
    if (inner.steps <= 0)  // degenerate: identical to the standard path
        return batch_grad(const_cast<const Network&>(net), batch, grad_out);

    const std::size_t n = batch.size();
    const std::size_t P = net.param_count();
    const int C = net.class_count();
    const double inv_n = 1.0 / static_cast<double>(n);
    std::fill(grad_out.begin(), grad_out.end(), 0.0);

    auto chunks = make_chunks(n);
    std::vector<std::vector<double>> partial(kReduceChunks);
    std::array<double, kReduceChunks> losses{};
#pragma omp parallel for schedule(static, 1)
    for (int c = 0; c < kReduceChunks; ++c) {
        if (chunks[c].begin == chunks[c].end) continue;
        partial[c].assign(P, 0.0);
        Workspace<double> ws_clean, ws_adv;
        std::vector<double> probs(C), adv_probs(C), dlog(C), x_adv;
        double acc = 0.0;
        for (std::size_t i = chunks[c].begin; i < chunks[c].end; ++i) {
            const Sample& s = *batch[i];
            auto logits = forward_eval<double>(net, net.params, s.input.data, ws_clean);
            softmax_stable<double>(logits, probs);
            double ce = cross_entropy_logits<double>(logits, s.label);

            trades_inner_attack(net, s, probs, inner,
                                mix64(batch_seed, static_cast<std::uint64_t>(i)),
                                x_adv);
            auto adv_logits = forward_eval<double>(net, net.params, x_adv, ws_adv);
            double kl;
            kl_from_logits(probs, adv_logits, adv_probs, kl);
            acc += (ce + beta * kl) * inv_n;

            // clean branch: CE term plus the KL dependence through p
            for (int j = 0; j < C; ++j) {
                double r = std::log(probs[j]) - std::log(adv_probs[j]);
                dlog[j] = (probs[j] - (j == s.label ? 1.0 : 0.0)) * inv_n +
                          beta * inv_n * probs[j] * (r - kl);
            }
            backward_eval<double>(net, net.params, ws_clean, dlog, partial[c]);

            // adversarial branch
            for (int j = 0; j < C; ++j)
                dlog[j] = beta * inv_n * (adv_probs[j] - probs[j]);
            backward_eval<double>(net, net.params, ws_adv, dlog, partial[c]);
        }
        losses[c] = acc;
    }
    double loss = 0.0;
    for (int c = 0; c < kReduceChunks; ++c) {
        loss += losses[c];
        if (partial[c].empty()) continue;
        for (std::size_t i = 0; i < P; ++i) grad_out[i] += partial[c][i];
    }
    return loss;
}

}  // namespace

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) kl += p[i] * (std::log(p[i]) - std::log(q[i]));
    return kl;
}

double trades_loss(const Network& net, Batch batch, double beta,
                   const AttackConfig& inner_attack, std::uint64_t batch_seed) {
    if (!(beta > 0.0)) throw ValueError("trades: beta must be > 0");
    std::vector<double> grad(net.param_count());
    return trades_grad(net, batch, beta, inner_attack, batch_seed, grad);
}

void awp_step(Network& net, Batch batch, double gamma,
              std::span<double> grad_out) {
    const std::size_t P = net.param_count();
    double base_loss = batch_grad(net, batch, grad_out);
    if (gamma <= 0.0) return;  // identical to the unperturbed gradient

    // per-layer relative-norm ascent direction from the current gradient
    std::vector<double> v(P, 0.0);
    for (const LayerDesc& L : net.layers) {
        if (L.param_count == 0) continue;
        double gn = 0.0, tn = 0.0;
        for (std::size_t i = L.param_offset; i < L.param_offset + L.param_count; ++i) {
            gn += grad_out[i] * grad_out[i];
            tn += net.params[i] * net.params[i];
        }
        gn = std::sqrt(gn);
        tn = std::sqrt(tn);
        if (gn == 0.0 || tn == 0.0) continue;  // zero-norm layer stays put
        double scale = gamma * tn / gn;
        for (std::size_t i = L.param_offset; i < L.param_offset + L.param_count; ++i)
            v[i] = scale * grad_out[i];
    }

    std::vector<double> saved = net.params;
    for (std::size_t i = 0; i < P; ++i) net.params[i] += v[i];
    double pert_loss = batch_loss(net, batch);
    if (pert_loss >= base_loss) {
        batch_grad(net, batch, grad_out);  // gradient at theta + v
    }  // else keep the unperturbed gradient
    net.params = std::move(saved);
}

Dataset with_extra_data(const Dataset& train_set, int factor,
                        std::uint64_t seed, const SampleGenerator* generator,
                        const Dataset* pool) {
    if (factor < 1) throw ValueError("with_extra_data: factor must be >= 1");
    if (factor == 1) return train_set;
    const int extra = static_cast<int>(train_set.samples.size()) * (factor - 1);
    Dataset out = train_set;
    if (generator != nullptr) {
        Dataset fresh = (*generator)(extra, mix64(seed, 0xedu));
        for (auto& s : fresh.samples) out.samples.push_back(std::move(s));
    } else if (pool != nullptr) {
        if (static_cast<int>(pool->samples.size()) < extra)
            throw ValueError("with_extra_data: held-out pool too small");
        Rng rng(mix64(seed, 0xedu));
        std::vector<int> idx(pool->samples.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.uniform_int(static_cast<int>(i))]);
        for (int i = 0; i < extra; ++i)
            out.samples.push_back(pool->samples[idx[i]]);
    } else {
        throw ValueError(
            "with_extra_data: image track requires a held-out pool");
    }
    return out;
}

std::string method_name(TrainMethod m) {
    switch (m) {
        case TrainMethod::standard: return "standard";
        case TrainMethod::at: return "at";
        case TrainMethod::trades: return "trades";
    }
    return "?";
}

TrainMethod method_from_name(const std::string& name) {
    if (name == "standard") return TrainMethod::standard;
    if (name == "at") return TrainMethod::at;
    if (name == "trades") return TrainMethod::trades;
    throw ValueError("unknown training method: " + name);
}

TrainHistory train(Network& net, const Dataset& train_set,
                   const Dataset* test_set, const TrainConfig& config) {
    if (train_set.samples.empty()) throw ValueError("train: empty training set");
    if (config.method == TrainMethod::trades && !(config.trades_beta > 0.0))
        throw ValueError("train: trades requires trades_beta > 0");
    if (config.awp && !(config.awp_gamma >= 0.0))
        throw ValueError("train: awp requires awp_gamma >= 0");
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t P = net.param_count();
    const std::size_t n = train_set.samples.size();
    std::vector<double> velocity(P, 0.0), grad(P);
    TrainHistory hist;

    std::vector<int> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);

    std::vector<Sample> adv_storage;
    auto train_ptrs = train_set.pointers();
    std::vector<const Sample*> test_ptrs;
    if (test_set != nullptr) test_ptrs = test_set->pointers();

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double lr = config.learning_rate;
        if (epoch >= (3 * config.epochs) / 4)
            lr *= 0.01;
        else if (epoch >= config.epochs / 2)
            lr *= 0.1;

        Rng shuffle_rng(mix64(config.seed, 0x5f1eu,
                              static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = n; i > 1; --i)
            std::swap(order[i - 1],
                      order[shuffle_rng.uniform_int(static_cast<int>(i))]);

        double epoch_loss = 0.0;
        int n_batches = 0;
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            std::size_t end = std::min(n, start + config.batch_size);
            std::vector<const Sample*> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i)
                batch.push_back(&train_set.samples[order[i]]);
            std::uint64_t batch_seed =
                mix64(config.seed, 0xba7cu, static_cast<std::uint64_t>(epoch),
                      static_cast<std::uint64_t>(start));

            if (config.method == TrainMethod::at) {
                // inner max: replace the batch by PGD adversarial examples
                adv_storage.resize(batch.size());
#pragma omp parallel for schedule(static)
                for (long i = 0; i < static_cast<long>(batch.size()); ++i) {
                    adv_storage[i].label = batch[i]->label;
                    adv_storage[i].input =
                        pgd(net, batch[i]->input, batch[i]->label,
                            config.inner_attack,
                            mix64(batch_seed, static_cast<std::uint64_t>(i)));
                }
                for (std::size_t i = 0; i < batch.size(); ++i)
                    batch[i] = &adv_storage[i];
            }

            double loss;
            if (config.method == TrainMethod::trades) {
                if (config.awp && config.awp_gamma > 0.0) {
                    // weight perturbation maximizing the TRADES objective
                    double base =
                        trades_grad(net, batch, config.trades_beta,
                                    config.inner_attack, batch_seed, grad);
                    std::vector<double> v(P, 0.0);
                    for (const LayerDesc& L : net.layers) {
                        if (L.param_count == 0) continue;
                        double gn = 0.0, tn = 0.0;
                        for (std::size_t i = L.param_offset;
                             i < L.param_offset + L.param_count; ++i) {
                            gn += grad[i] * grad[i];
                            tn += net.params[i] * net.params[i];
                        }
                        gn = std::sqrt(gn);
                        tn = std::sqrt(tn);
                        if (gn == 0.0 || tn == 0.0) continue;
                        double scale = config.awp_gamma * tn / gn;
                        for (std::size_t i = L.param_offset;
                             i < L.param_offset + L.param_count; ++i)
                            v[i] = scale * grad[i];
                    }
                    std::vector<double> saved = net.params;
                    for (std::size_t i = 0; i < P; ++i) net.params[i] += v[i];
                    loss = trades_grad(net, batch, config.trades_beta,
                                       config.inner_attack, batch_seed, grad);
                    net.params = std::move(saved);
                    if (loss < base)  // fall back to the unperturbed gradient
                        loss = trades_grad(net, batch, config.trades_beta,
                                           config.inner_attack, batch_seed,
                                           grad);
                } else {
                    loss = trades_grad(net, batch, config.trades_beta,
                                       config.inner_attack, batch_seed, grad);
                }
            } else if (config.awp && config.awp_gamma > 0.0) {
                awp_step(net, batch, config.awp_gamma, grad);
                loss = batch_loss(net, batch);
            } else {
                loss = batch_grad(net, batch, grad);
            }

            if (!std::isfinite(loss)) throw TrainingDivergedError(epoch);

            for (std::size_t i = 0; i < P; ++i) {
                velocity[i] = config.momentum * velocity[i] - lr * grad[i];
                net.params[i] += velocity[i];
            }
            epoch_loss += loss;
            ++n_batches;
        }
        hist.train_loss.push_back(epoch_loss / n_batches);
        hist.train_accuracy.push_back(batch_accuracy(net, train_ptrs));
        hist.test_accuracy.push_back(
            test_ptrs.empty() ? std::nan("") : batch_accuracy(net, test_ptrs));
    }
    hist.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return hist;
}

}  // namespace effdim
