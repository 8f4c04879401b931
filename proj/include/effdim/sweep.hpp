#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "effdim/model_zoo.hpp"
#include "effdim/spectral.hpp"
#include "effdim/stats.hpp"
#include "effdim/training.hpp"

namespace effdim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Reference desk configuration: two tracks (two-moons MLPs, synthetic blob
// images with the small CNN) swept over the width grid.
struct SweepConfig {
    std::uint64_t base_seed = 42;
    bool deterministic = false;
    int jobs = 0;  // 0 = library default
    std::string out_dir = "out";
    std::string data_dir;  // EFFDIM_DATA_DIR override

    // datasets
    int moons_n = 1000;
    double moons_noise = 0.12;
    int image_n = 1000;
    int image_classes = 4;
    double image_noise = 0.15;
    int image_side = 16;
    double test_fraction = 0.3;

    // attack budgets are pixel-scale; 2-D inputs rescale them
    double attack_scale_2d = 10.0;
    double attack_scale_image = 1.0;
    std::vector<double> widths = {0.5, 1.0, 1.5, 2.0, 3.0, 4.0};
    std::vector<double> eps_grid;    // defaults to {1/255 .. 8/255}
    std::vector<double> sigma_grid;  // defaults to {0.05 .. 0.4}

    // training
    int epochs = 40;
    int batch_size = 32;
    double learning_rate = 0.1;
    double momentum = 0.9;
    double trades_beta = 6.0;
    double awp_gamma = 0.005;
    double inner_eps = 4.0 / 255.0;  // training-time budget, pixel scale
    int inner_steps = 10;
    int extra_factor = 2;

    // spectral
    double z = 1.0;
    int lanczos_k = 100;
    int hvp_subset = 1000;

    int method_seeds = 3;
    int base_seeds = 1;  // repeated whole-grid runs for scale/robustness

    SweepConfig();  // fills the grids

    static SweepConfig from_json_file(const std::string& path);
    static SweepConfig from_json_text(const std::string& text);
    std::string canonical_json() const;
    std::uint64_t config_hash() const;
};

struct SweepRow {
    std::string sweep;
    std::string model_id;
    std::string family;
    double width = 0.0;
    std::size_t params = 0;
    std::string method = "standard";
    bool awp = false;
    bool extra_data = false;
    std::uint64_t seed = 0;
    double eff_dim = 0.0;
    double z = 1.0;
    double neg_mass = 0.0;
    double tail_bound = 0.0;
    std::optional<double> eff_dim_pct_change;
    std::string attack = "none";
    double budget = 0.0;
    double attack_scale = 1.0;
    double clean_p = 0.0;
    double p_star = 0.0;
    std::optional<double> p_r;
    bool excluded = false;
    std::string error;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    std::map<std::string, TrendStats> trends;
    int failed_cells = 0;
    std::uint64_t config_hash = 0;
};

SweepReport run_scale_sweep(const SweepConfig& config);
SweepReport run_robustness_sweep(const SweepConfig& config);
SweepReport run_training_method_sweep(const SweepConfig& config);

void write_report_csv(const SweepReport& report, const std::string& path);
void write_trends_json(const SweepReport& report, const std::string& path);
std::vector<SweepRow> read_report_csv(const std::string& path);

// plot-data bundle + summary statistics recomputed from CSV rows
void report_from_csvs(const std::vector<std::string>& csv_paths,
                      const std::string& out_dir);

// helpers shared with the CLI and tests
Dataset make_track_dataset(const SweepConfig& cfg, Family family,
                           std::uint64_t seed);
ModelSpec make_track_spec(const SweepConfig& cfg, Family family, double width,
                          std::uint64_t init_seed);
double track_attack_scale(const SweepConfig& cfg, Family family);
void mark_outliers(std::vector<SweepRow>& rows);

}  // namespace effdim
