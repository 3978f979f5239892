#pragma once

#include <cstdint>
#include <string>

#include "dsel/common.hpp"

namespace dsel {

/// Flat key=value run configuration. A config file supplies defaults, command
/// line flags win. All fields carry usable defaults; validate_* checks the
/// ranges a command actually needs.
struct RunConfig {
    // Paths
    std::string corpus_path;
    std::string output_dir;
    std::string reference_path;  // empty -> synthesize from planted metadata
    std::string model_path;      // analyze: model snapshot

    // Labeling
    std::string preset = "slimpajama";
    std::string generator_path;  // JSON generator spec, overrides preset
    std::string raw_path;        // unlabeled input, demo labelers applied
    std::size_t points = 0;      // 0 -> the generator spec's own size (presets: 20000)
    std::size_t emit_ref = 300;  // reference examples written next to the corpus
    double ref_noise = 0.05;

    // Pipeline
    long T = 750;
    long U = 150;
    std::size_t k = 2000;
    std::size_t batch_size = 32;
    std::size_t m = 500;
    std::uint64_t seed = 17;
    double actor_eta = 0.3;
    double console_eta = 0.1;
    std::string regime = "collaborative";  // or competitive, single:<actor>
    std::string policy = "topk";           // or random
    std::string n_interp = "sampled";      // or all
    bool dynamic_theta = true;
    double learning_rate = 0.05;

    // Reward model
    std::string model_kind = "linear-regression";
    double ridge = 1e-3;
    std::string reward_mode = "exact";  // or projected
    std::size_t projection_dim = 128;
    std::uint64_t projection_seed = 0;
    bool identity_projection = false;
    double cg_tol = 1e-8;
    int cg_max_iters = 0;       // 0 -> 10 x parameters
    double damping = -1.0;      // negative -> automatic relative damping

    // Initializer
    std::string init = "uniform";  // uniform | regmix | dir:<path>
    std::size_t init_configs = 512;
    std::string init_family = "quadratic-ridge";
    double init_concentration = 5.0;
    std::size_t init_candidates = 10000;
    double init_ridge = 1e-6;

    // Reference evaluation
    std::size_t ref_sample = 500;

    // Analyze
    int stage = 0;

    void apply_key(const std::string& key, const std::string& value,
                   const std::string& context);
};

/// Reads a flat INI-style file (# or ; comments). Unknown keys and malformed
/// lines raise config_error with file:line positions.
void load_config_file(RunConfig& cfg, const std::string& path);

}  // namespace dsel
