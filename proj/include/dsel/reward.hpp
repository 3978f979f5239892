#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "dsel/common.hpp"
#include "dsel/corpus.hpp"

namespace dsel {

/// A supervised example for the stand-in training model.
struct Example {
    Vec input;
    double target = 0.0;
};

/// Corpus documents carry their own supervision: the last feature component
/// is the target, the rest are the model input.
Example to_example(const DataPoint& point);
std::vector<Example> corpus_examples(const Corpus& corpus);

enum class ModelKind { linear_regression, logistic_regression, softmax_classifier };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

/// Small convex model exposing per-example loss, gradient and exact
/// Hessian-vector products. The ridge term belongs to the training objective;
/// per-example quantities are raw so influence math stays in the classical
/// form.
class RewardModel {
public:
    static RewardModel linear(std::size_t input_dim, double ridge, bool with_bias = true);
    static RewardModel logistic(std::size_t input_dim, double ridge, bool with_bias = true);
    static RewardModel softmax(std::size_t input_dim, std::size_t classes, double ridge,
                               bool with_bias = true);

    ModelKind kind() const { return kind_; }
    double ridge() const { return ridge_; }
    bool with_bias() const { return with_bias_; }
    std::size_t input_dim() const { return input_dim_; }
    std::size_t classes() const { return classes_; }
    std::size_t param_count() const { return params_.size(); }

    Vec& params() { return params_; }
    const Vec& params() const { return params_; }

    double example_loss(const Example& x) const;
    void add_example_gradient(const Example& x, std::span<double> out) const;
    void add_example_hessian_vec(const Example& x, std::span<const double> v,
                                 std::span<double> out) const;
    double example_hessian_trace(const Example& x) const;

    double mean_loss(std::span<const Example> xs) const;
    Vec example_gradient(const Example& x) const;
    Vec mean_gradient(std::span<const Example> xs) const;

    // Training objective: mean loss + (ridge/2) |params|^2.
    double objective(std::span<const Example> xs) const;
    Vec objective_gradient(std::span<const Example> xs) const;
    // out = (mean per-example Hessian + ridge I) v
    void objective_hessian_vec(std::span<const Example> xs, std::span<const double> v,
                               std::span<double> out) const;

    void sgd_step(std::span<const Example> batch, double learning_rate);

    nlohmann::ordered_json to_json() const;
    static RewardModel from_json(const nlohmann::ordered_json& j);

private:
    RewardModel(ModelKind kind, std::size_t input_dim, std::size_t classes, double ridge,
                bool with_bias);

    void check_example(const Example& x) const;

    ModelKind kind_;
    std::size_t input_dim_;
    std::size_t classes_;  // softmax only
    double ridge_;
    bool with_bias_;
    Vec params_;
};

/// Held-out examples whose loss improvement is the reward signal. Evaluation
/// draws a fixed seeded subsample.
struct ReferenceTask {
    std::vector<Example> points;
    std::size_t sample_size = 500;
    std::uint64_t seed = 0;

    // Deterministic subsample indices (uniform, without replacement).
    std::vector<std::size_t> sampled_indices() const;
};

ReferenceTask make_reference_task(std::vector<Example> points, std::size_t sample_size,
                                  std::uint64_t seed);

/// Builds a clean reference task from a synthetic corpus's planted true
/// weights. Throws data_error when the corpus has no planted metadata.
ReferenceTask synthesize_reference_task(const Corpus& corpus, std::size_t n_points,
                                        double noise, std::uint64_t seed);

void save_reference_task(const ReferenceTask& task, const std::string& path);
ReferenceTask load_reference_task(const std::string& path, std::size_t sample_size,
                                  std::uint64_t seed);

struct InfluenceConfig {
    enum class Mode { exact, projected };
    Mode mode = Mode::exact;
    std::size_t projection_dim = 128;
    bool identity_projection = false;
    std::uint64_t projection_seed = 0;
    double cg_tolerance = 1e-8;
    int cg_max_iters = 0;                 // 0 -> 10 * parameter count
    std::optional<double> damping;        // absent -> 1e-3 * trace(H) / p
};

/// Mean gradient of the reference loss over the task's seeded subsample.
Vec reference_gradient(const RewardModel& model, const ReferenceTask& task);

/// Influence of a training point on the reference loss, the first-order
/// estimate of the reference-loss change from upweighting the point:
///   influence(x) = -g_ref' (H + damping I)^{-1} g_x,
/// with H the mean per-example Hessian of the training objective over
/// hessian_set. Helpful points come out negative; the selection pipeline
/// flips the sign to obtain its reward (see RewardOracle).
class InfluenceCalculator {
public:
    InfluenceCalculator(const RewardModel& model, std::span<const Example> hessian_set,
                        const ReferenceTask& task, InfluenceConfig cfg);

    // Solves (H + damping I) v = g_x, returns -g_ref . v.
    double exact(const Example& x) const;

    // Sketched variant: -(P g_ref)' (P H P' + damping I)^{-1} (P g_x).
    double projected(const Example& x) const;

    double influence(const Example& x) const;

    // Shared-solve factorization: one reference-side solve, then a dot
    // product per point. Equal to the per-point operations by symmetry.
    std::vector<double> batch(std::span<const Example> xs) const;

    const Vec& ref_gradient() const { return g_ref_; }
    double damping() const { return damping_; }

private:
    Vec apply_projection(std::span<const double> v) const;
    void hessian_op(std::span<const double> v, std::span<double> out) const;
    Vec solve_exact(std::span<const double> rhs) const;
    Vec solve_projected(std::span<const double> rhs) const;

    const RewardModel& model_;
    std::span<const Example> hessian_set_;
    InfluenceConfig cfg_;
    double damping_;
    int max_iters_;
    Vec g_ref_;
    Vec projection_;        // dense d x p, row-major; empty when identity
    Vec projected_hessian_; // dense d x d (P H P'), projected mode only
};

/// Per-id influence values for a list of corpus points (the configured mode).
std::unordered_map<Id, double> batch_rewards(const RewardModel& model,
                                             const ReferenceTask& task,
                                             std::span<const Id> ids, const Corpus& corpus,
                                             const InfluenceConfig& cfg);

/// Pipeline-facing adapter owning the live model. Rewards are oriented so
/// that larger means better for the reference task: reward = -influence.
class RewardOracle {
public:
    RewardOracle(RewardModel model, const Corpus& corpus, ReferenceTask task,
                 InfluenceConfig cfg);

    std::unordered_map<Id, double> rewards(std::span<const Id> ids) const;
    double reference_loss() const;  // mean loss over all reference points
    double train_loss(std::span<const Id> batch) const;
    void train_step(std::span<const Id> batch, double learning_rate);

    RewardModel& model() { return model_; }
    const RewardModel& model() const { return model_; }
    const ReferenceTask& task() const { return task_; }
    const InfluenceConfig& config() const { return cfg_; }
    const std::vector<Example>& examples() const { return examples_; }

private:
    RewardModel model_;
    std::vector<Example> examples_;
    ReferenceTask task_;
    InfluenceConfig cfg_;
};

}  // namespace dsel
