#include "effdim/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "effdim/rng.hpp"

namespace effdim {

namespace {

double clip01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// project into the epsilon-ball around x intersected with [0,1]^d
void project(std::span<double> cand, std::span<const double> x, double eps) {
    for (std::size_t i = 0; i < cand.size(); ++i) {
        double lo = std::max(0.0, x[i] - eps);
        double hi = std::min(1.0, x[i] + eps);
        cand[i] = std::clamp(cand[i], lo, hi);
    }
}

struct AttackScratch {
    Workspace<double> ws;
    std::vector<double> grad, cur, cand, best;
};

// PGD with step acceptance; the unperturbed input is always in the
// candidate set, so the returned loss is >= the clean loss.
double pgd_single(const Network& net, std::span<const double> x, int y,
                  const AttackConfig& cfg, std::uint64_t sample_seed,
                  AttackScratch& s, std::vector<double>& out) {
    const std::size_t d = x.size();
    s.grad.resize(d);
    s.cur.resize(d);
    s.cand.resize(d);
    out.assign(x.begin(), x.end());
    double best_loss = sample_loss(net, x, y, s.ws);
    const double alpha = cfg.effective_step();
    for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
        Rng rng(mix64(sample_seed, 0xadu, static_cast<std::uint64_t>(r)));
        for (std::size_t i = 0; i < d; ++i)
            s.cur[i] = x[i] + rng.uniform(-cfg.epsilon, cfg.epsilon);
        project(s.cur, x, cfg.epsilon);
        double cur_loss = sample_loss(net, s.cur, y, s.ws);
        for (int step = 0; step < cfg.steps; ++step) {
            loss_and_input_grad(net, s.cur, y, s.grad, s.ws);
            for (std::size_t i = 0; i < d; ++i) {
                double g = s.grad[i];
                double sg = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
                s.cand[i] = s.cur[i] + alpha * sg;
            }
            project(s.cand, x, cfg.epsilon);
            double cand_loss = sample_loss(net, s.cand, y, s.ws);
            // greedy acceptance keeps the per-restart loss trace monotone
            if (cand_loss >= cur_loss) {
                std::swap(s.cur, s.cand);
                cur_loss = cand_loss;
            }
        }
        if (cur_loss > best_loss) {
            best_loss = cur_loss;
            out.assign(s.cur.begin(), s.cur.end());
        }
    }
    return best_loss;
}

double fgsm_single(const Network& net, std::span<const double> x, int y,
                   double eps, AttackScratch& s, std::vector<double>& out) {
    const std::size_t d = x.size();
    s.grad.resize(d);
    loss_and_input_grad(net, x, y, s.grad, s.ws);
    out.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        double g = s.grad[i];
        double sg = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
        out[i] = x[i] + eps * sg;
    }
    project(out, x, eps);
    return sample_loss(net, out, y, s.ws);
}

double attack_single(const Network& net, AttackKind kind,
                     std::span<const double> x, int y, const AttackConfig& cfg,
                     std::uint64_t sample_seed, AttackScratch& s,
                     std::vector<double>& out) {
    switch (kind) {
        case AttackKind::fgsm:
            return fgsm_single(net, x, y, cfg.epsilon, s, out);
        case AttackKind::pgd:
            return pgd_single(net, x, y, cfg, sample_seed, s, out);
        case AttackKind::pgd_strong: {
            // strongest-of {PGD, FGSM} per sample
            double lp = pgd_single(net, x, y, cfg, sample_seed, s, out);
            std::vector<double> f;
            double lf = fgsm_single(net, x, y, cfg.epsilon, s, f);
            if (lf > lp) {
                out = std::move(f);
                return lf;
            }
            return lp;
        }
        case AttackKind::gaussian: {
            out.assign(x.begin(), x.end());
            if (cfg.sigma > 0.0) {
                Rng rng(mix64(sample_seed, 0x6a055u));
                for (auto& v : out) v = clip01(v + cfg.sigma * rng.normal());
            }
            Workspace<double>& ws = s.ws;
            return sample_loss(net, out, y, ws);
        }
        case AttackKind::none:
            out.assign(x.begin(), x.end());
            return sample_loss(net, x, y, s.ws);
    }
    throw ValueError("attack_single: unknown attack kind");
}

}  // namespace

std::string attack_name(AttackKind k) {
    switch (k) {
        case AttackKind::fgsm: return "fgsm";
        case AttackKind::pgd: return "pgd";
        case AttackKind::pgd_strong: return "pgd-strong";
        case AttackKind::gaussian: return "gaussian";
        case AttackKind::none: return "none";
    }
    return "?";
}

Tensor fgsm(const Network& net, const Tensor& x, int y, double epsilon) {
    AttackScratch s;
    std::vector<double> out;
    fgsm_single(net, x.data, y, epsilon, s, out);
    return Tensor{x.shape, std::move(out)};
}

Tensor pgd(const Network& net, const Tensor& x, int y, const AttackConfig& cfg,
           std::uint64_t sample_seed) {
    AttackScratch s;
    std::vector<double> out;
    pgd_single(net, x.data, y, cfg, sample_seed, s, out);
    return Tensor{x.shape, std::move(out)};
}

Tensor gaussian_perturb(const Tensor& x, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw ValueError("gaussian_perturb: negative sigma");
    Tensor out = x;
    if (sigma > 0.0) {
        Rng rng(mix64(seed, 0x6a055u));
        for (auto& v : out.data) v = clip01(v + sigma * rng.normal());
    }
    return out;
}

std::vector<RobustnessRecord> grid_evaluate(const Network& net,
                                            const Dataset& test,
                                            AttackKind kind,
                                            std::span<const double> budgets,
                                            const AttackConfig& base) {
    if (test.samples.empty()) throw ValueError("grid_evaluate: empty test set");
    const std::size_t n = test.samples.size();

    std::vector<int> clean_ok(n, 0);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < static_cast<long>(n); ++i) {
        const Sample& s = test.samples[i];
        clean_ok[i] = predict(net, s.input.data) == s.label ? 1 : 0;
    }
    long clean_hits = 0;
    for (int v : clean_ok) clean_hits += v;
    const double p = static_cast<double>(clean_hits) / static_cast<double>(n);

    const bool nested = kind != AttackKind::gaussian;
    // per-sample carried state for nested budgets
    std::vector<std::vector<double>> best_cand(n);
    std::vector<double> best_loss(n, -1.0);
    std::vector<char> broken(n, 0);

    std::vector<RobustnessRecord> records;
    for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
        AttackConfig cfg = base;
        cfg.kind = kind;
        if (kind == AttackKind::gaussian)
            cfg.sigma = budgets[bi];
        else
            cfg.epsilon = budgets[bi];

#pragma omp parallel for schedule(static)
        for (long i = 0; i < static_cast<long>(n); ++i) {
            const Sample& s = test.samples[i];
            AttackScratch scratch;
            std::vector<double> cand;
            std::uint64_t sseed =
                mix64(cfg.seed, static_cast<std::uint64_t>(i),
                      static_cast<std::uint64_t>(bi + 1));
            double loss = attack_single(net, kind, s.input.data, s.label, cfg,
                                        sseed, scratch, cand);
            bool mis = predict(net, cand) != s.label;
            if (nested) {
                if (mis) broken[i] = 1;
                if (loss > best_loss[i]) {
                    best_loss[i] = loss;
                    best_cand[i] = std::move(cand);
                }
            } else {
                broken[i] = mis ? 1 : 0;
            }
        }
        long hits = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (!broken[i]) ++hits;
        RobustnessRecord rec;
        rec.clean_accuracy = p;
        rec.attacked_accuracy = static_cast<double>(hits) / static_cast<double>(n);
        if (p > 0.0) rec.relative_performance = rec.attacked_accuracy / p;
        rec.attack = cfg;
        rec.n_evaluated = static_cast<int>(n);
        records.push_back(rec);
    }
    return records;
}

RobustnessRecord evaluate_robustness(const Network& net, const Dataset& test,
                                     const AttackConfig& config) {
    double budget =
        config.kind == AttackKind::gaussian ? config.sigma : config.epsilon;
    return grid_evaluate(net, test, config.kind, std::span(&budget, 1), config)
        .front();
}

}  // namespace effdim
