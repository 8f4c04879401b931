#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "effdim/attacks.hpp"
#include "effdim/data.hpp"
#include "effdim/model_zoo.hpp"
#include "effdim/rng.hpp"
#include "effdim/spectral.hpp"
#include "effdim/sweep.hpp"
#include "effdim/training.hpp"

namespace fs = std::filesystem;
using namespace effdim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;
constexpr int kExitIo = 3;

struct GlobalOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
    bool deterministic = false;
};

SweepConfig load_config(const GlobalOpts& g) {
    SweepConfig cfg;
    if (!g.config_path.empty()) cfg = SweepConfig::from_json_file(g.config_path);
    if (g.seed_set) cfg.base_seed = g.seed;
    if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
    if (g.jobs > 0) cfg.jobs = g.jobs;
    if (g.deterministic) cfg.deterministic = true;
    if (cfg.data_dir.empty())
        if (const char* env = std::getenv("EFFDIM_DATA_DIR")) cfg.data_dir = env;
    if (cfg.data_dir.empty()) cfg.data_dir = cfg.out_dir;
    return cfg;
}

Family parse_family(const std::string& s) { return family_from_name(s); }

// cell setup shared by the train/effdim/attack subcommands
struct TrackContext {
    Dataset train_set, test_set;
    double attack_scale = 1.0;
};

TrackContext make_track(const SweepConfig& cfg, Family family) {
    std::uint64_t run_seed = mix64(cfg.base_seed, 0x5ca1eu, 0);
    Dataset full = make_track_dataset(cfg, family, run_seed);
    TrackContext t;
    auto [tr, te] = split(full, cfg.test_fraction, mix64(run_seed, 0x59u));
    t.train_set = std::move(tr);
    t.test_set = std::move(te);
    t.attack_scale = track_attack_scale(cfg, family);
    return t;
}

int run_sweep(const SweepConfig& cfg, const std::string& which) {
    SweepReport report;
    if (which == "scale")
        report = run_scale_sweep(cfg);
    else if (which == "robustness")
        report = run_robustness_sweep(cfg);
    else if (which == "methods")
        report = run_training_method_sweep(cfg);
    else
        throw ConfigError("unknown sweep: " + which);
    fs::create_directories(cfg.out_dir);
    write_report_csv(report, (fs::path(cfg.out_dir) / (which + ".csv")).string());
    write_trends_json(
        report, (fs::path(cfg.out_dir) / (which + "_trends.json")).string());
    std::cout << "sweep " << which << ": " << report.rows.size() << " rows, "
              << report.failed_cells << " failed cells -> " << cfg.out_dir
              << "/" << which << ".csv\n";
    return report.failed_cells > 0 ? kExitPartial : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Effective-dimensionality and adversarial-robustness lab"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON configuration file");
    app.add_option("--out", g.out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", g.seed, "base seed");
    app.add_option("--jobs", g.jobs, "worker thread count");
    app.add_flag("--deterministic", g.deterministic,
                 "force single-threaded execution");

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a dataset on disk");
    std::string gen_kind = "two-moons";
    int gen_n = 1000, gen_classes = 4;
    double gen_noise = 0.12;
    gen->add_option("--dataset", gen_kind,
                    "two-moons | blobs | blob-images");
    gen->add_option("--n", gen_n, "sample count");
    gen->add_option("--noise", gen_noise, "noise / spread");
    gen->add_option("--classes", gen_classes, "class count (blobs tracks)");

    // train
    auto* tr = app.add_subcommand("train", "train one model");
    std::string tr_family = "mlp", tr_method = "standard", tr_ckpt;
    double tr_width = 1.0;
    bool tr_awp = false, tr_extra = false;
    tr->add_option("--family", tr_family, "mlp | smallcnn");
    tr->add_option("--width", tr_width, "width multiplier");
    tr->add_option("--method", tr_method, "standard | at | trades");
    tr->add_flag("--awp", tr_awp, "adversarial weight perturbation");
    tr->add_flag("--extra-data", tr_extra, "extra-data augmentation");
    tr->add_option("--checkpoint", tr_ckpt, "checkpoint output path");

    // effdim
    auto* ed = app.add_subcommand("effdim",
                                  "Hessian spectrum + effective dimensionality");
    std::string ed_ckpt, ed_prefix = "spectrum";
    ed->add_option("--checkpoint", ed_ckpt, "model checkpoint")->required();
    ed->add_option("--prefix", ed_prefix, "output file prefix");

    // attack
    auto* at = app.add_subcommand("attack", "evaluate robustness of a model");
    std::string at_ckpt, at_kind = "pgd-strong";
    double at_eps = 4.0 / 255.0, at_sigma = 0.2;
    at->add_option("--checkpoint", at_ckpt, "model checkpoint")->required();
    at->add_option("--attack", at_kind, "fgsm | pgd | pgd-strong | gaussian");
    at->add_option("--epsilon", at_eps, "l-inf budget (pixel scale)");
    at->add_option("--sigma", at_sigma, "gaussian std");

    // sweep
    auto* sw = app.add_subcommand("sweep", "run an experiment sweep");
    std::string sw_which;
    sw->add_option("which", sw_which, "scale | robustness | methods")
        ->required();

    // report
    auto* rp = app.add_subcommand("report", "plot-data bundle from sweep CSVs");
    std::vector<std::string> rp_inputs;
    rp->add_option("--inputs", rp_inputs, "sweep CSV files")->required();

    CLI11_PARSE(app, argc, argv);
    g.seed_set = seed_opt->count() > 0;

    try {
        SweepConfig cfg = load_config(g);

        if (gen->parsed()) {
            fs::create_directories(cfg.data_dir);
            std::uint64_t seed = mix64(cfg.base_seed, 0xda7au);
            if (gen_kind == "two-moons" || gen_kind == "blobs") {
                Dataset ds = gen_kind == "two-moons"
                                 ? generate_two_moons(gen_n, gen_noise, seed)
                                 : generate_blobs(gen_n, gen_classes,
                                                  gen_noise, seed);
                fs::path p = fs::path(cfg.data_dir) / (gen_kind + ".csv");
                std::ofstream out(p, std::ios::binary);
                out << "x0,x1,label\n";
                char buf[96];
                for (const auto& s : ds.samples) {
                    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d\n",
                                  s.input.data[0], s.input.data[1], s.label);
                    out << buf;
                }
                std::cout << "wrote " << p.string() << "\n";
            } else if (gen_kind == "blob-images") {
                Dataset ds = generate_blob_images(gen_n, gen_classes,
                                                  gen_noise, seed,
                                                  cfg.image_side);
                int side = cfg.image_side;
                Tensor images = Tensor::zeros(
                    {static_cast<int>(ds.size()), side, side});
                Tensor labels = Tensor::zeros({static_cast<int>(ds.size())});
                std::size_t per = static_cast<std::size_t>(side) * side;
                for (std::size_t i = 0; i < ds.size(); ++i) {
                    std::copy(ds.samples[i].input.data.begin(),
                              ds.samples[i].input.data.end(),
                              images.data.begin() + i * per);
                    labels.data[i] = ds.samples[i].label / 255.0;
                }
                fs::path pi = fs::path(cfg.data_dir) / "blob-images-idx3-ubyte";
                fs::path pl = fs::path(cfg.data_dir) / "blob-labels-idx1-ubyte";
                write_idx(pi.string(), images);
                write_idx(pl.string(), labels);
                std::cout << "wrote " << pi.string() << " and " << pl.string()
                          << "\n";
            } else {
                throw ConfigError("unknown dataset kind: " + gen_kind);
            }
            return kExitOk;
        }

        if (tr->parsed()) {
            Family family = parse_family(tr_family);
            TrackContext track = make_track(cfg, family);
            ModelSpec spec = make_track_spec(cfg, family, tr_width,
                                             mix64(cfg.base_seed, 0x171u));
            Network net = build_model(spec);
            TrainConfig tc;
            tc.method = method_from_name(tr_method);
            tc.awp = tr_awp;
            tc.extra_data = tr_extra;
            tc.epochs = cfg.epochs;
            tc.batch_size = cfg.batch_size;
            tc.learning_rate = cfg.learning_rate;
            tc.momentum = cfg.momentum;
            tc.trades_beta = cfg.trades_beta;
            tc.awp_gamma = cfg.awp_gamma;
            tc.seed = mix64(cfg.base_seed, 0x7217u);
            tc.inner_attack =
                TrainConfig::default_inner(cfg.inner_eps * track.attack_scale);
            tc.inner_attack.steps = cfg.inner_steps;
            TrainHistory hist = train(net, track.train_set, &track.test_set, tc);
            if (tr_ckpt.empty())
                tr_ckpt = (fs::path(cfg.out_dir) /
                           (family_name(family) + "-w" + std::to_string(tr_width) +
                            ".ckpt"))
                              .string();
            fs::create_directories(fs::path(tr_ckpt).parent_path().empty()
                                       ? "."
                                       : fs::path(tr_ckpt).parent_path().string());
            save_checkpoint(net, tr_ckpt);
            fs::path hist_path = fs::path(tr_ckpt).replace_extension(".history.csv");
            std::ofstream h(hist_path, std::ios::binary);
            h << "epoch,train_loss,train_accuracy,test_accuracy\n";
            char buf[128];
            for (std::size_t e = 0; e < hist.train_loss.size(); ++e) {
                std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", e,
                              hist.train_loss[e], hist.train_accuracy[e],
                              hist.test_accuracy[e]);
                h << buf;
            }
            std::cout << "trained " << family_name(family) << " width "
                      << tr_width << ", final test accuracy "
                      << hist.test_accuracy.back() << ", checkpoint "
                      << tr_ckpt << "\n";
            return kExitOk;
        }

        if (ed->parsed()) {
            Network net = load_checkpoint(ed_ckpt);
            TrackContext track = make_track(cfg, net.spec.family);
            EffDimConfig ec;
            ec.z = cfg.z;
            ec.k = cfg.lanczos_k;
            ec.hvp_subset = cfg.hvp_subset;
            ec.seed = mix64(cfg.base_seed, 0x4e55u);
            Spectrum s = hessian_spectrum(net, track.test_set, ec);
            fs::create_directories(cfg.out_dir);
            fs::path csv = fs::path(cfg.out_dir) / (ed_prefix + ".csv");
            fs::path js = fs::path(cfg.out_dir) / (ed_prefix + ".json");
            save_spectrum_csv(s, csv.string(), js.string(), ec);
            std::cout << "N_eff(z=" << cfg.z
                      << ") = " << effective_dimensionality(s, cfg.z) << " ("
                      << s.k << " Ritz values, neg mass "
                      << s.neg_mass_fraction << ") -> " << csv.string() << "\n";
            return kExitOk;
        }

        if (at->parsed()) {
            Network net = load_checkpoint(at_ckpt);
            TrackContext track = make_track(cfg, net.spec.family);
            AttackConfig a;
            if (at_kind == "fgsm") a.kind = AttackKind::fgsm;
            else if (at_kind == "pgd") a.kind = AttackKind::pgd;
            else if (at_kind == "pgd-strong") a.kind = AttackKind::pgd_strong;
            else if (at_kind == "gaussian") a.kind = AttackKind::gaussian;
            else throw ConfigError("unknown attack kind: " + at_kind);
            a.epsilon = at_eps * track.attack_scale;
            a.sigma = at_sigma;
            a.seed = mix64(cfg.base_seed, 0xa77acu);
            RobustnessRecord rec = evaluate_robustness(net, track.test_set, a);
            nlohmann::ordered_json j;
            j["attack"] = attack_name(a.kind);
            j["budget"] = a.kind == AttackKind::gaussian ? a.sigma : at_eps;
            j["attack_scale"] = track.attack_scale;
            j["clean_accuracy"] = rec.clean_accuracy;
            j["attacked_accuracy"] = rec.attacked_accuracy;
            if (rec.relative_performance)
                j["relative_performance"] = *rec.relative_performance;
            else
                j["relative_performance"] = "undefined";
            j["n_evaluated"] = rec.n_evaluated;
            std::cout << j.dump(2) << "\n";
            return kExitOk;
        }

        if (sw->parsed()) return run_sweep(cfg, sw_which);

        if (rp->parsed()) {
            report_from_csvs(rp_inputs, cfg.out_dir);
            std::cout << "report bundle written to " << cfg.out_dir << "\n";
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const IdxError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const CheckpointError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
