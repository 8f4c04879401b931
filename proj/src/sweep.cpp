#include "effdim/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "effdim/attacks.hpp"
#include "effdim/data.hpp"
#include "effdim/rng.hpp"

namespace effdim {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

SweepConfig::SweepConfig() {
    for (int i = 1; i <= 8; ++i) eps_grid.push_back(i / 255.0);
    for (int i = 1; i <= 8; ++i) sigma_grid.push_back(0.05 * i);
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

void apply_concurrency(const SweepConfig& cfg) {
#ifdef _OPENMP
    if (cfg.deterministic)
        omp_set_num_threads(1);
    else if (cfg.jobs > 0)
        omp_set_num_threads(cfg.jobs);
#else
    (void)cfg;
#endif
}

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = kFnvOffset;
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

}  // namespace

std::string SweepConfig::canonical_json() const {
    ordered_json j;
    j["base_seed"] = base_seed;
    j["deterministic"] = deterministic;
    j["out_dir"] = out_dir;
    j["data_dir"] = data_dir;
    j["moons_n"] = moons_n;
    j["moons_noise"] = moons_noise;
    j["image_n"] = image_n;
    j["image_classes"] = image_classes;
    j["image_noise"] = image_noise;
    j["image_side"] = image_side;
    j["test_fraction"] = test_fraction;
    j["attack_scale_2d"] = attack_scale_2d;
    j["attack_scale_image"] = attack_scale_image;
    j["widths"] = widths;
    j["eps_grid"] = eps_grid;
    j["sigma_grid"] = sigma_grid;
    j["epochs"] = epochs;
    j["batch_size"] = batch_size;
    j["learning_rate"] = learning_rate;
    j["momentum"] = momentum;
    j["trades_beta"] = trades_beta;
    j["awp_gamma"] = awp_gamma;
    j["inner_eps"] = inner_eps;
    j["inner_steps"] = inner_steps;
    j["extra_factor"] = extra_factor;
    j["z"] = z;
    j["lanczos_k"] = lanczos_k;
    j["hvp_subset"] = hvp_subset;
    j["method_seeds"] = method_seeds;
    j["base_seeds"] = base_seeds;
    // note: jobs is execution policy, not part of the experiment identity
    return j.dump();
}

std::uint64_t SweepConfig::config_hash() const {
    return fnv1a(canonical_json());
}

SweepConfig SweepConfig::from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    SweepConfig cfg;
    const std::set<std::string> known = {
        "base_seed", "deterministic", "out_dir", "data_dir", "moons_n",
        "moons_noise", "image_n", "image_classes", "image_noise", "image_side",
        "test_fraction", "attack_scale_2d", "attack_scale_image", "widths",
        "eps_grid", "sigma_grid", "epochs", "batch_size", "learning_rate",
        "momentum", "trades_beta", "awp_gamma", "inner_eps", "inner_steps",
        "extra_factor", "z", "lanczos_k", "hvp_subset", "method_seeds",
        "base_seeds", "jobs"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("config: unknown key '" + it.key() + "'");
    try {
        if (j.contains("base_seed")) cfg.base_seed = j["base_seed"];
        if (j.contains("deterministic")) cfg.deterministic = j["deterministic"];
        if (j.contains("out_dir")) cfg.out_dir = j["out_dir"];
        if (j.contains("data_dir")) cfg.data_dir = j["data_dir"];
        if (j.contains("jobs")) cfg.jobs = j["jobs"];
        if (j.contains("moons_n")) cfg.moons_n = j["moons_n"];
        if (j.contains("moons_noise")) cfg.moons_noise = j["moons_noise"];
        if (j.contains("image_n")) cfg.image_n = j["image_n"];
        if (j.contains("image_classes")) cfg.image_classes = j["image_classes"];
        if (j.contains("image_noise")) cfg.image_noise = j["image_noise"];
        if (j.contains("image_side")) cfg.image_side = j["image_side"];
        if (j.contains("test_fraction")) cfg.test_fraction = j["test_fraction"];
        if (j.contains("attack_scale_2d")) cfg.attack_scale_2d = j["attack_scale_2d"];
        if (j.contains("attack_scale_image"))
            cfg.attack_scale_image = j["attack_scale_image"];
        if (j.contains("widths")) cfg.widths = j["widths"].get<std::vector<double>>();
        if (j.contains("eps_grid"))
            cfg.eps_grid = j["eps_grid"].get<std::vector<double>>();
        if (j.contains("sigma_grid"))
            cfg.sigma_grid = j["sigma_grid"].get<std::vector<double>>();
        if (j.contains("epochs")) cfg.epochs = j["epochs"];
        if (j.contains("batch_size")) cfg.batch_size = j["batch_size"];
        if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"];
        if (j.contains("momentum")) cfg.momentum = j["momentum"];
        if (j.contains("trades_beta")) cfg.trades_beta = j["trades_beta"];
        if (j.contains("awp_gamma")) cfg.awp_gamma = j["awp_gamma"];
        if (j.contains("inner_eps")) cfg.inner_eps = j["inner_eps"];
        if (j.contains("inner_steps")) cfg.inner_steps = j["inner_steps"];
        if (j.contains("extra_factor")) cfg.extra_factor = j["extra_factor"];
        if (j.contains("z")) cfg.z = j["z"];
        if (j.contains("lanczos_k")) cfg.lanczos_k = j["lanczos_k"];
        if (j.contains("hvp_subset")) cfg.hvp_subset = j["hvp_subset"];
        if (j.contains("method_seeds")) cfg.method_seeds = j["method_seeds"];
        if (j.contains("base_seeds")) cfg.base_seeds = j["base_seeds"];
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: bad value type: ") + e.what());
    }
    if (cfg.epochs < 1 || cfg.batch_size < 1 || !(cfg.z > 0.0) ||
        cfg.lanczos_k < 1 ||
        !(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0))
        throw ConfigError("config: out-of-range value");
    return cfg;
}

SweepConfig SweepConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

Dataset make_track_dataset(const SweepConfig& cfg, Family family,
                           std::uint64_t seed) {
    if (family == Family::mlp)
        return generate_two_moons(cfg.moons_n, cfg.moons_noise,
                                  mix64(seed, 0x300u));
    return generate_blob_images(cfg.image_n, cfg.image_classes,
                                cfg.image_noise, mix64(seed, 0x301u),
                                cfg.image_side);
}

ModelSpec make_track_spec(const SweepConfig& cfg, Family family, double width,
                          std::uint64_t init_seed) {
    ModelSpec spec;
    spec.family = family;
    spec.width_multiplier = width;
    spec.init_seed = init_seed;
    if (family == Family::mlp) {
        spec.input_shape = {2};
        spec.class_count = 2;
    } else {
        spec.input_shape = {1, cfg.image_side, cfg.image_side};
        spec.class_count = cfg.image_classes;
    }
    return spec;
}

double track_attack_scale(const SweepConfig& cfg, Family family) {
    return family == Family::mlp ? cfg.attack_scale_2d : cfg.attack_scale_image;
}

void mark_outliers(std::vector<SweepRow>& rows) {
    std::vector<double> ps;
    for (const auto& r : rows)
        if (r.error.empty()) ps.push_back(r.clean_p);
    if (ps.empty()) return;
    std::sort(ps.begin(), ps.end());
    double median = ps[ps.size() / 2];
    for (auto& r : rows)
        if (r.error.empty() && r.clean_p < 0.7 * median) r.excluded = true;
}

namespace {

struct TrainedCell {
    Network net;
    double eff_dim = 0.0;
    Spectrum spectrum;
};

std::string model_id(Family family, double width, const std::string& method,
                     bool awp, bool extra, std::uint64_t seed) {
    std::string id = family_name(family) + "-w" + fmt_short(width);
    if (method != "standard" || awp || extra) {
        id += "-" + method;
        if (awp) id += "-awp";
        if (extra) id += "-ed";
    }
    id += "-s" + std::to_string(seed);
    return id;
}

TrainedCell train_cell(const SweepConfig& cfg, Family family, double width,
                       TrainMethod method, bool awp, bool extra,
                       std::uint64_t seed, const Dataset& train_set,
                       const Dataset& test_set) {
    std::uint64_t cell_seed =
        mix64(cfg.base_seed, fnv1a(model_id(family, width, method_name(method),
                                            awp, extra, seed)));
    ModelSpec spec =
        make_track_spec(cfg, family, width, mix64(cell_seed, 0x171u));
    Network net = build_model(spec);

    TrainConfig tc;
    tc.method = method;
    tc.awp = awp;
    tc.extra_data = extra;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size;
    tc.learning_rate = cfg.learning_rate;
    tc.momentum = cfg.momentum;
    tc.trades_beta = cfg.trades_beta;
    tc.awp_gamma = cfg.awp_gamma;
    tc.seed = mix64(cell_seed, 0x7217u);
    double scale = track_attack_scale(cfg, family);
    tc.inner_attack = TrainConfig::default_inner(cfg.inner_eps * scale);
    tc.inner_attack.steps = cfg.inner_steps;
    tc.inner_attack.seed = mix64(cell_seed, 0xa77ac4u);

    const Dataset* train_ptr = &train_set;
    Dataset augmented;
    if (extra && cfg.extra_factor > 1) {
        if (family == Family::mlp) {
            SampleGenerator gen = [&cfg](int n, std::uint64_t s) {
                // keep n even for the two-moons generator
                return generate_two_moons(n + (n % 2), cfg.moons_noise, s);
            };
            augmented = with_extra_data(train_set, cfg.extra_factor,
                                        mix64(cell_seed, 0xe07au), &gen);
        } else {
            SampleGenerator gen = [&cfg](int n, std::uint64_t s) {
                return generate_blob_images(n, cfg.image_classes,
                                            cfg.image_noise, s,
                                            cfg.image_side);
            };
            augmented = with_extra_data(train_set, cfg.extra_factor,
                                        mix64(cell_seed, 0xe07au), &gen);
        }
        train_ptr = &augmented;
    }

    train(net, *train_ptr, &test_set, tc);

    EffDimConfig ec;
    ec.z = cfg.z;
    ec.k = cfg.lanczos_k;
    ec.hvp_subset = cfg.hvp_subset;
    ec.seed = mix64(cfg.base_seed, 0x4e55u);  // same subset across cells
    TrainedCell out{std::move(net), 0.0, {}};
    out.spectrum = hessian_spectrum(out.net, test_set, ec);
    out.eff_dim = effective_dimensionality(out.spectrum, cfg.z);
    return out;
}

SweepRow base_row(const SweepConfig& cfg, const std::string& sweep,
                  Family family, double width, TrainMethod method, bool awp,
                  bool extra, std::uint64_t seed) {
    SweepRow r;
    r.sweep = sweep;
    r.family = family_name(family);
    r.width = width;
    r.method = method_name(method);
    r.awp = awp;
    r.extra_data = extra;
    r.seed = seed;
    r.z = cfg.z;
    r.model_id = model_id(family, width, r.method, awp, extra, seed);
    r.attack_scale = track_attack_scale(cfg, family);
    return r;
}

void sort_rows(std::vector<SweepRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const SweepRow& a, const SweepRow& b) {
                         auto ka = std::tie(a.sweep, a.family, a.width,
                                            a.method, a.awp, a.extra_data,
                                            a.seed, a.attack, a.budget);
                         auto kb = std::tie(b.sweep, b.family, b.width,
                                            b.method, b.awp, b.extra_data,
                                            b.seed, b.attack, b.budget);
                         return ka < kb;
                     });
}

}  // namespace

SweepReport run_scale_sweep(const SweepConfig& cfg) {
    apply_concurrency(cfg);
    SweepReport report;
    report.config_hash = cfg.config_hash();
    for (int bs = 0; bs < cfg.base_seeds; ++bs) {
        std::uint64_t run_seed = mix64(cfg.base_seed, 0x5ca1eu, bs);
        for (Family family : {Family::mlp, Family::smallcnn}) {
            Dataset full = make_track_dataset(cfg, family, run_seed);
            auto [train_set, test_set] =
                split(full, cfg.test_fraction, mix64(run_seed, 0x59u));
            for (double width : cfg.widths) {
                SweepRow row = base_row(cfg, "scale", family, width,
                                        TrainMethod::standard, false, false,
                                        bs);
                try {
                    TrainedCell cell =
                        train_cell(cfg, family, width, TrainMethod::standard,
                                   false, false, bs, train_set, test_set);
                    row.params = cell.net.param_count();
                    row.eff_dim = cell.eff_dim;
                    row.neg_mass = cell.spectrum.neg_mass_fraction;
                    row.tail_bound = cell.spectrum.tail_bound;
                    row.clean_p =
                        batch_accuracy(cell.net, test_set.pointers());
                    row.p_star = row.clean_p;
                    row.p_r = 1.0;
                } catch (const std::exception& e) {
                    row.error = e.what();
                    ++report.failed_cells;
                }
                report.rows.push_back(std::move(row));
            }
        }
    }
    sort_rows(report.rows);
    // trend of N_eff against parameter count, per family
    for (const std::string fam : {"mlp", "smallcnn"}) {
        std::vector<Point> pts;
        for (const auto& r : report.rows)
            if (r.error.empty() && r.family == fam)
                pts.emplace_back(static_cast<double>(r.params), r.eff_dim);
        if (pts.size() >= 3)
            report.trends["scale:neff_vs_params:" + fam] = compute_trend(pts);
    }
    return report;
}

SweepReport run_robustness_sweep(const SweepConfig& cfg) {
    apply_concurrency(cfg);
    SweepReport report;
    report.config_hash = cfg.config_hash();
    for (int bs = 0; bs < cfg.base_seeds; ++bs) {
        std::uint64_t run_seed = mix64(cfg.base_seed, 0x5ca1eu, bs);
        for (Family family : {Family::mlp, Family::smallcnn}) {
            Dataset full = make_track_dataset(cfg, family, run_seed);
            auto [train_set, test_set] =
                split(full, cfg.test_fraction, mix64(run_seed, 0x59u));
            double scale = track_attack_scale(cfg, family);
            for (double width : cfg.widths) {
                SweepRow proto = base_row(cfg, "robustness", family, width,
                                          TrainMethod::standard, false, false,
                                          bs);
                try {
                    TrainedCell cell =
                        train_cell(cfg, family, width, TrainMethod::standard,
                                   false, false, bs, train_set, test_set);
                    proto.params = cell.net.param_count();
                    proto.eff_dim = cell.eff_dim;
                    proto.neg_mass = cell.spectrum.neg_mass_fraction;
                    proto.tail_bound = cell.spectrum.tail_bound;

                    // pgd-strong over the epsilon grid, with an eps=0 control
                    std::vector<double> budgets = {0.0};
                    for (double e : cfg.eps_grid) budgets.push_back(e * scale);
                    AttackConfig base;
                    base.seed = mix64(cfg.base_seed, 0xa77acu, bs);
                    auto recs =
                        grid_evaluate(cell.net, test_set,
                                      AttackKind::pgd_strong, budgets, base);
                    for (std::size_t i = 0; i < recs.size(); ++i) {
                        SweepRow row = proto;
                        row.attack = "pgd-strong";
                        row.budget = i == 0 ? 0.0 : cfg.eps_grid[i - 1];
                        row.clean_p = recs[i].clean_accuracy;
                        row.p_star = recs[i].attacked_accuracy;
                        row.p_r = recs[i].relative_performance;
                        report.rows.push_back(std::move(row));
                    }
                    // gaussian noise track (sigma is not rescaled)
                    auto grecs = grid_evaluate(cell.net, test_set,
                                               AttackKind::gaussian,
                                               cfg.sigma_grid, base);
                    for (std::size_t i = 0; i < grecs.size(); ++i) {
                        SweepRow row = proto;
                        row.attack = "gaussian";
                        row.attack_scale = 1.0;
                        row.budget = cfg.sigma_grid[i];
                        row.clean_p = grecs[i].clean_accuracy;
                        row.p_star = grecs[i].attacked_accuracy;
                        row.p_r = grecs[i].relative_performance;
                        report.rows.push_back(std::move(row));
                    }
                } catch (const std::exception& e) {
                    proto.error = e.what();
                    ++report.failed_cells;
                    report.rows.push_back(std::move(proto));
                }
            }
        }
    }
    mark_outliers(report.rows);
    sort_rows(report.rows);
    // per attack cell: relative performance against effective dimensionality
    std::set<std::pair<std::string, double>> cells;
    for (const auto& r : report.rows)
        if (r.error.empty() && r.attack != "none")
            cells.insert({r.attack, r.budget});
    for (const auto& [attack, budget] : cells) {
        std::vector<Point> pts;
        for (const auto& r : report.rows)
            if (r.error.empty() && !r.excluded && r.attack == attack &&
                r.budget == budget && r.p_r.has_value())
                pts.emplace_back(r.eff_dim, *r.p_r);
        if (pts.size() >= 3)
            report.trends["robustness:pr_vs_neff:" + attack + ":" +
                          fmt_short(budget)] = compute_trend(pts);
    }
    return report;
}

SweepReport run_training_method_sweep(const SweepConfig& cfg) {
    apply_concurrency(cfg);
    SweepReport report;
    report.config_hash = cfg.config_hash();

    const Family family = Family::mlp;
    const double width = 2.0;
    const double scale = track_attack_scale(cfg, family);
    const double mid_eps =
        cfg.eps_grid.empty() ? 0.0
                             : cfg.eps_grid[cfg.eps_grid.size() / 2] * scale;

    std::uint64_t run_seed = mix64(cfg.base_seed, 0x3e7d0d5u);
    Dataset full = make_track_dataset(cfg, family, run_seed);
    auto [train_set, test_set] =
        split(full, cfg.test_fraction, mix64(run_seed, 0x59u));

    std::map<std::uint64_t, double> baseline_neff;  // seed -> standard-none
    for (std::uint64_t seed = 0;
         seed < static_cast<std::uint64_t>(cfg.method_seeds); ++seed) {
        for (TrainMethod method :
             {TrainMethod::standard, TrainMethod::at, TrainMethod::trades}) {
            for (bool awp : {false, true}) {
                for (bool extra : {false, true}) {
                    SweepRow row = base_row(cfg, "methods", family, width,
                                            method, awp, extra, seed);
                    try {
                        TrainedCell cell =
                            train_cell(cfg, family, width, method, awp, extra,
                                       seed, train_set, test_set);
                        row.params = cell.net.param_count();
                        row.eff_dim = cell.eff_dim;
                        row.neg_mass = cell.spectrum.neg_mass_fraction;
                        row.tail_bound = cell.spectrum.tail_bound;
                        if (method == TrainMethod::standard && !awp && !extra)
                            baseline_neff[seed] = cell.eff_dim;

                        AttackConfig atk;
                        atk.kind = AttackKind::pgd_strong;
                        atk.epsilon = mid_eps;
                        atk.seed = mix64(cfg.base_seed, 0xa77acu, seed);
                        auto rec = evaluate_robustness(cell.net, test_set, atk);
                        row.attack = "pgd-strong";
                        row.budget = mid_eps / scale;
                        row.clean_p = rec.clean_accuracy;
                        row.p_star = rec.attacked_accuracy;
                        row.p_r = rec.relative_performance;
                    } catch (const std::exception& e) {
                        row.error = e.what();
                        ++report.failed_cells;
                    }
                    report.rows.push_back(std::move(row));
                }
            }
        }
    }
    for (auto& row : report.rows) {
        auto it = baseline_neff.find(row.seed);
        if (row.error.empty() && it != baseline_neff.end() && it->second != 0.0)
            row.eff_dim_pct_change =
                100.0 * (row.eff_dim - it->second) / it->second;
    }
    mark_outliers(report.rows);
    sort_rows(report.rows);
    std::vector<Point> pts;
    for (const auto& r : report.rows)
        if (r.error.empty() && !r.excluded && r.p_r.has_value())
            pts.emplace_back(r.eff_dim, *r.p_r);
    if (pts.size() >= 3)
        report.trends["methods:pr_vs_neff:pgd-strong"] = compute_trend(pts);
    return report;
}

// ---- persistence -------------------------------------------------------

namespace {

constexpr int kSchemaVersion = 1;

const char* kHeader =
    "schema_version,sweep,model_id,family,width,param_count,method,awp,"
    "extra_data,seed,eff_dim,z,neg_mass_fraction,tail_bound,"
    "eff_dim_pct_change,attack,budget,attack_scale,clean_p,p_star,p_r,"
    "excluded,config_hash,error";

std::string sanitize(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return out;
}

}  // namespace

void write_report_csv(const SweepReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << kHeader << "\n";
    for (const auto& r : report.rows) {
        out << kSchemaVersion << ',' << r.sweep << ',' << r.model_id << ','
            << r.family << ',' << fmt_double(r.width) << ',' << r.params << ','
            << r.method << ',' << (r.awp ? 1 : 0) << ','
            << (r.extra_data ? 1 : 0) << ',' << r.seed << ','
            << fmt_double(r.eff_dim) << ',' << fmt_double(r.z) << ','
            << fmt_double(r.neg_mass) << ',' << fmt_double(r.tail_bound) << ','
            << (r.eff_dim_pct_change ? fmt_double(*r.eff_dim_pct_change) : "")
            << ',' << r.attack << ',' << fmt_double(r.budget) << ','
            << fmt_double(r.attack_scale) << ',' << fmt_double(r.clean_p)
            << ',' << fmt_double(r.p_star) << ','
            << (r.p_r ? fmt_double(*r.p_r) : "") << ',' << (r.excluded ? 1 : 0)
            << ',' << report.config_hash << ',' << sanitize(r.error) << "\n";
    }
    if (!out) throw IoError("write failed for " + path);
}

std::vector<SweepRow> read_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV: " + path);
    if (line != kHeader)
        throw IoError("unexpected CSV header in " + path +
                      " (schema mismatch at column set)");
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        f.resize(24);
        SweepRow r;
        r.sweep = f[1];
        r.model_id = f[2];
        r.family = f[3];
        r.width = std::stod(f[4]);
        r.params = static_cast<std::size_t>(std::stoull(f[5]));
        r.method = f[6];
        r.awp = f[7] == "1";
        r.extra_data = f[8] == "1";
        r.seed = std::stoull(f[9]);
        r.eff_dim = std::stod(f[10]);
        r.z = std::stod(f[11]);
        r.neg_mass = std::stod(f[12]);
        r.tail_bound = std::stod(f[13]);
        if (!f[14].empty()) r.eff_dim_pct_change = std::stod(f[14]);
        r.attack = f[15];
        r.budget = std::stod(f[16]);
        r.attack_scale = std::stod(f[17]);
        r.clean_p = std::stod(f[18]);
        r.p_star = std::stod(f[19]);
        if (!f[20].empty()) r.p_r = std::stod(f[20]);
        r.excluded = f[21] == "1";
        r.error = f[23];
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

ordered_json trend_to_json(const TrendStats& t) {
    ordered_json j;
    j["slope"] = t.slope;
    j["intercept"] = t.intercept;
    j["r_squared"] = t.r_squared;
    j["spearman_rho"] = t.spearman_rho;
    j["n_points"] = t.n_points;
    return j;
}

}  // namespace

void write_trends_json(const SweepReport& report, const std::string& path) {
    ordered_json j;
    j["config_hash"] = report.config_hash;
    j["failed_cells"] = report.failed_cells;
    ordered_json trends;
    for (const auto& [name, t] : report.trends) trends[name] = trend_to_json(t);
    j["trends"] = trends;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

void report_from_csvs(const std::vector<std::string>& csv_paths,
                      const std::string& out_dir) {
    fs::create_directories(out_dir);
    ordered_json summary;
    for (const auto& path : csv_paths) {
        auto rows = read_report_csv(path);
        // group by (sweep, attack, budget) for plot data
        std::map<std::tuple<std::string, std::string, double>,
                 std::vector<const SweepRow*>>
            groups;
        for (const auto& r : rows) {
            if (!r.error.empty()) continue;
            groups[{r.sweep, r.attack, r.budget}].push_back(&r);
        }
        for (const auto& [key, grp] : groups) {
            const auto& [sweep, attack, budget] = key;
            std::string fname = "plot_" + sweep + "_" + attack + "_" +
                                fmt_short(budget) + ".csv";
            std::vector<Point> pts;
            std::ofstream out(fs::path(out_dir) / fname, std::ios::binary);
            out << "x,y,series\n";
            for (const SweepRow* r : grp) {
                double x, y;
                if (sweep == "scale") {
                    x = static_cast<double>(r->params);
                    y = r->eff_dim;
                } else {
                    if (!r->p_r.has_value()) continue;  // omit, never zero-fill
                    x = r->eff_dim;
                    y = *r->p_r;
                }
                std::string series = r->family + "/" + r->method +
                                     (r->awp ? "+awp" : "") +
                                     (r->extra_data ? "+extra_data(simple)" : "");
                out << fmt_double(x) << ',' << fmt_double(y) << ',' << series
                    << "\n";
                if (!r->excluded) pts.emplace_back(x, y);
            }
            std::string trend_key = sweep + ":" + attack + ":" + fmt_short(budget);
            bool two_distinct_x = false;
            for (std::size_t i = 1; i < pts.size(); ++i)
                if (pts[i].first != pts[0].first) two_distinct_x = true;
            if (pts.size() >= 3 && two_distinct_x)
                summary[trend_key] = trend_to_json(compute_trend(pts));
        }
    }
    std::ofstream out(fs::path(out_dir) / "summary.json", std::ios::binary);
    if (!out) throw IoError("cannot write summary.json");
    out << summary.dump(2) << "\n";
}

}  // namespace effdim
