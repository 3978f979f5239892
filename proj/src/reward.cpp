#include "dsel/reward.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dsel/linalg.hpp"
#include "dsel/rng.hpp"

namespace dsel {

Example to_example(const DataPoint& point) {
    if (point.features.size() < 2)
        throw data_error("point " + std::to_string(point.id) +
                         " has too few features to carry a target");
    Example x;
    x.input.assign(point.features.begin(), point.features.end() - 1);
    x.target = point.features.back();
    return x;
}

std::vector<Example> corpus_examples(const Corpus& corpus) {
    std::vector<Example> xs;
    xs.reserve(corpus.size());
    for (const auto& p : corpus.points) xs.push_back(to_example(p));
    return xs;
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::linear_regression: return "linear-regression";
        case ModelKind::logistic_regression: return "logistic-regression";
        case ModelKind::softmax_classifier: return "softmax-classifier";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "linear-regression") return ModelKind::linear_regression;
    if (s == "logistic-regression") return ModelKind::logistic_regression;
    if (s == "softmax-classifier") return ModelKind::softmax_classifier;
    throw config_error("unknown model kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// RewardModel

RewardModel::RewardModel(ModelKind kind, std::size_t input_dim, std::size_t classes,
                         double ridge, bool with_bias)
    : kind_(kind), input_dim_(input_dim), classes_(classes), ridge_(ridge),
      with_bias_(with_bias) {
    if (input_dim == 0) throw config_error("model input dimension must be positive");
    if (ridge < 0.0) throw config_error("ridge coefficient must be nonnegative");
    const std::size_t block = input_dim_ + (with_bias_ ? 1 : 0);
    params_.assign(kind == ModelKind::softmax_classifier ? classes_ * block : block, 0.0);
}

RewardModel RewardModel::linear(std::size_t input_dim, double ridge, bool with_bias) {
    return RewardModel(ModelKind::linear_regression, input_dim, 1, ridge, with_bias);
}

RewardModel RewardModel::logistic(std::size_t input_dim, double ridge, bool with_bias) {
    return RewardModel(ModelKind::logistic_regression, input_dim, 1, ridge, with_bias);
}

RewardModel RewardModel::softmax(std::size_t input_dim, std::size_t classes, double ridge,
                                 bool with_bias) {
    if (classes < 2) throw config_error("softmax model needs at least 2 classes");
    return RewardModel(ModelKind::softmax_classifier, input_dim, classes, ridge, with_bias);
}

void RewardModel::check_example(const Example& x) const {
    if (x.input.size() != input_dim_)
        throw data_error("example input has dimension " + std::to_string(x.input.size()) +
                         ", model expects " + std::to_string(input_dim_));
}

namespace {

double augmented_dot(const Vec& params, std::size_t offset, const Vec& u, bool bias) {
    double z = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) z += params[offset + i] * u[i];
    if (bias) z += params[offset + u.size()];
    return z;
}

// out[offset..] += c * [u; 1]
void add_scaled_augmented(double c, const Vec& u, bool bias, std::size_t offset,
                          std::span<double> out) {
    for (std::size_t i = 0; i < u.size(); ++i) out[offset + i] += c * u[i];
    if (bias) out[offset + u.size()] += c;
}

double augmented_norm2(const Vec& u, bool bias) {
    double s = bias ? 1.0 : 0.0;
    for (double v : u) s += v * v;
    return s;
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

double RewardModel::example_loss(const Example& x) const {
    check_example(x);
    const std::size_t block = input_dim_ + (with_bias_ ? 1 : 0);
    switch (kind_) {
        case ModelKind::linear_regression: {
            const double r = augmented_dot(params_, 0, x.input, with_bias_) - x.target;
            return 0.5 * r * r;
        }
        case ModelKind::logistic_regression: {
            const double z = augmented_dot(params_, 0, x.input, with_bias_);
            // log(1 + e^z) - y z, computed stably.
            const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z))
                                            : std::log1p(std::exp(z));
            return softplus - x.target * z;
        }
        case ModelKind::softmax_classifier: {
            const auto y = static_cast<std::size_t>(x.target);
            if (x.target < 0.0 || y >= classes_ ||
                static_cast<double>(y) != x.target)
                throw data_error("softmax target must be an integer class index");
            double zmax = -1e300;
            Vec z(classes_);
            for (std::size_t c = 0; c < classes_; ++c) {
                z[c] = augmented_dot(params_, c * block, x.input, with_bias_);
                zmax = std::max(zmax, z[c]);
            }
            double lse = 0.0;
            for (std::size_t c = 0; c < classes_; ++c) lse += std::exp(z[c] - zmax);
            return zmax + std::log(lse) - z[y];
        }
    }
    return 0.0;
}

void RewardModel::add_example_gradient(const Example& x, std::span<double> out) const {
    check_example(x);
    const std::size_t block = input_dim_ + (with_bias_ ? 1 : 0);
    switch (kind_) {
        case ModelKind::linear_regression: {
            const double r = augmented_dot(params_, 0, x.input, with_bias_) - x.target;
            add_scaled_augmented(r, x.input, with_bias_, 0, out);
            return;
        }
        case ModelKind::logistic_regression: {
            const double p = sigmoid(augmented_dot(params_, 0, x.input, with_bias_));
            add_scaled_augmented(p - x.target, x.input, with_bias_, 0, out);
            return;
        }
        case ModelKind::softmax_classifier: {
            const auto y = static_cast<std::size_t>(x.target);
            Vec p(classes_);
            double zmax = -1e300;
            for (std::size_t c = 0; c < classes_; ++c) {
                p[c] = augmented_dot(params_, c * block, x.input, with_bias_);
                zmax = std::max(zmax, p[c]);
            }
            double total = 0.0;
            for (auto& v : p) {
                v = std::exp(v - zmax);
                total += v;
            }
            for (auto& v : p) v /= total;
            for (std::size_t c = 0; c < classes_; ++c) {
                const double coeff = p[c] - (c == y ? 1.0 : 0.0);
                add_scaled_augmented(coeff, x.input, with_bias_, c * block, out);
            }
            return;
        }
    }
}

void RewardModel::add_example_hessian_vec(const Example& x, std::span<const double> v,
                                          std::span<double> out) const {
    check_example(x);
    const std::size_t block = input_dim_ + (with_bias_ ? 1 : 0);
    auto augmented_v_dot = [&](std::size_t offset) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.input.size(); ++i) s += v[offset + i] * x.input[i];
        if (with_bias_) s += v[offset + x.input.size()];
        return s;
    };
    switch (kind_) {
        case ModelKind::linear_regression: {
            add_scaled_augmented(augmented_v_dot(0), x.input, with_bias_, 0, out);
            return;
        }
        case ModelKind::logistic_regression: {
            const double p = sigmoid(augmented_dot(params_, 0, x.input, with_bias_));
            add_scaled_augmented(p * (1.0 - p) * augmented_v_dot(0), x.input, with_bias_, 0,
                                 out);
            return;
        }
        case ModelKind::softmax_classifier: {
            Vec p(classes_);
            double zmax = -1e300;
            for (std::size_t c = 0; c < classes_; ++c) {
                p[c] = augmented_dot(params_, c * block, x.input, with_bias_);
                zmax = std::max(zmax, p[c]);
            }
            double total = 0.0;
            for (auto& pv : p) {
                pv = std::exp(pv - zmax);
                total += pv;
            }
            for (auto& pv : p) pv /= total;
            Vec a(classes_);
            double s = 0.0;
            for (std::size_t c = 0; c < classes_; ++c) {
                a[c] = augmented_v_dot(c * block);
                s += p[c] * a[c];
            }
            for (std::size_t c = 0; c < classes_; ++c)
                add_scaled_augmented(p[c] * (a[c] - s), x.input, with_bias_, c * block, out);
            return;
        }
    }
}

double RewardModel::example_hessian_trace(const Example& x) const {
    check_example(x);
    const std::size_t block = input_dim_ + (with_bias_ ? 1 : 0);
    const double u2 = augmented_norm2(x.input, with_bias_);
    switch (kind_) {
        case ModelKind::linear_regression:
            return u2;
        case ModelKind::logistic_regression: {
            const double p = sigmoid(augmented_dot(params_, 0, x.input, with_bias_));
            return p * (1.0 - p) * u2;
        }
        case ModelKind::softmax_classifier: {
            Vec p(classes_);
            double zmax = -1e300;
            for (std::size_t c = 0; c < classes_; ++c) {
                p[c] = augmented_dot(params_, c * block, x.input, with_bias_);
                zmax = std::max(zmax, p[c]);
            }
            double total = 0.0;
            for (auto& pv : p) {
                pv = std::exp(pv - zmax);
                total += pv;
            }
            double tr = 0.0;
            for (auto& pv : p) {
                pv /= total;
                tr += pv * (1.0 - pv);
            }
            return tr * u2;
        }
    }
    return 0.0;
}

double RewardModel::mean_loss(std::span<const Example> xs) const {
    if (xs.empty()) throw data_error("mean_loss over an empty example set");
    KahanSum sum;
    for (const auto& x : xs) sum.add(example_loss(x));
    return sum.value() / static_cast<double>(xs.size());
}

Vec RewardModel::example_gradient(const Example& x) const {
    Vec g(param_count(), 0.0);
    add_example_gradient(x, g);
    return g;
}

Vec RewardModel::mean_gradient(std::span<const Example> xs) const {
    if (xs.empty()) throw data_error("mean_gradient over an empty example set");
    Vec g(param_count(), 0.0);
    for (const auto& x : xs) add_example_gradient(x, g);
    scal(1.0 / static_cast<double>(xs.size()), g);
    return g;
}

double RewardModel::objective(std::span<const Example> xs) const {
    return mean_loss(xs) + 0.5 * ridge_ * dot(params_, params_);
}

Vec RewardModel::objective_gradient(std::span<const Example> xs) const {
    Vec g = mean_gradient(xs);
    axpy(ridge_, params_, g);
    return g;
}

void RewardModel::objective_hessian_vec(std::span<const Example> xs,
                                        std::span<const double> v,
                                        std::span<double> out) const {
    if (xs.empty()) throw data_error("hessian-vector product over an empty example set");
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& x : xs) add_example_hessian_vec(x, v, out);
    const double inv_n = 1.0 / static_cast<double>(xs.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] * inv_n + ridge_ * v[i];
}

void RewardModel::sgd_step(std::span<const Example> batch, double learning_rate) {
    Vec g = objective_gradient(batch);
    axpy(-learning_rate, g, params_);
}

nlohmann::ordered_json RewardModel::to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = to_string(kind_);
    j["input_dim"] = input_dim_;
    j["classes"] = classes_;
    j["ridge"] = ridge_;
    j["with_bias"] = with_bias_;
    j["params"] = params_;
    return j;
}

RewardModel RewardModel::from_json(const nlohmann::ordered_json& j) {
    try {
        const auto kind = model_kind_from_string(j.at("kind").get<std::string>());
        const auto input_dim = j.at("input_dim").get<std::size_t>();
        const auto classes = j.at("classes").get<std::size_t>();
        const auto ridge = j.at("ridge").get<double>();
        const auto with_bias = j.at("with_bias").get<bool>();
        RewardModel m(kind, input_dim, classes, ridge, with_bias);
        auto params = j.at("params").get<Vec>();
        if (params.size() != m.param_count())
            throw io_error("model snapshot has wrong parameter count");
        m.params_ = std::move(params);
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("invalid model snapshot: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Reference tasks

std::vector<std::size_t> ReferenceTask::sampled_indices() const {
    if (points.empty()) throw data_error("reference task has no points");
    if (sample_size >= points.size()) {
        std::vector<std::size_t> all(points.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return all;
    }
    Rng rng(derive_seed(seed, "reference_sample"));
    return rng.sample_without_replacement(points.size(), sample_size);
}

ReferenceTask make_reference_task(std::vector<Example> points, std::size_t sample_size,
                                  std::uint64_t seed) {
    if (points.empty()) throw data_error("reference task needs at least one point");
    ReferenceTask t;
    t.sample_size = std::min(sample_size == 0 ? points.size() : sample_size, points.size());
    t.points = std::move(points);
    t.seed = seed;
    return t;
}

ReferenceTask synthesize_reference_task(const Corpus& corpus, std::size_t n_points,
                                        double noise, std::uint64_t seed) {
    if (!corpus.metadata.contains("true_weights"))
        throw data_error(
            "corpus metadata carries no planted weights; supply a reference task file");
    const Vec w = corpus.metadata["true_weights"].get<Vec>();
    Rng rng(derive_seed(seed, "reference"));
    std::vector<Example> points;
    points.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        Example x;
        x.input.resize(w.size());
        double clean = 0.0;
        for (std::size_t d = 0; d < w.size(); ++d) {
            x.input[d] = rng.normal();
            clean += w[d] * x.input[d];
        }
        x.target = clean + noise * rng.normal();
        points.push_back(std::move(x));
    }
    return make_reference_task(std::move(points), 500, derive_seed(seed, "reference_eval"));
}

void save_reference_task(const ReferenceTask& task, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < task.points.size(); ++i) {
        nlohmann::ordered_json j;
        j["id"] = i;
        j["features"] = task.points[i].input;
        j["target"] = task.points[i].target;
        out << j.dump() << '\n';
    }
    if (!out) throw io_error("failed while writing '" + path + "'");
}

ReferenceTask load_reference_task(const std::string& path, std::size_t sample_size,
                                  std::uint64_t seed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open reference task '" + path + "'");
    std::vector<Example> points;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::ordered_json::parse(line);
            Example x;
            x.input = j.at("features").get<Vec>();
            x.target = j.at("target").get<double>();
            points.push_back(std::move(x));
        } catch (const nlohmann::json::exception& e) {
            throw io_error(path + ":" + std::to_string(line_no) +
                           ": invalid reference record: " + e.what());
        }
    }
    return make_reference_task(std::move(points), sample_size, seed);
}

Vec reference_gradient(const RewardModel& model, const ReferenceTask& task) {
    const auto idx = task.sampled_indices();
    Vec g(model.param_count(), 0.0);
    for (std::size_t i : idx) model.add_example_gradient(task.points[i], g);
    scal(1.0 / static_cast<double>(idx.size()), g);
    return g;
}

// ---------------------------------------------------------------------------
// InfluenceCalculator

InfluenceCalculator::InfluenceCalculator(const RewardModel& model,
                                         std::span<const Example> hessian_set,
                                         const ReferenceTask& task, InfluenceConfig cfg)
    : model_(model), hessian_set_(hessian_set), cfg_(cfg) {
    if (hessian_set_.empty())
        throw data_error("influence computation needs a nonempty Hessian example set");
    const std::size_t p = model_.param_count();

    if (cfg_.damping) {
        if (*cfg_.damping < 0.0) throw config_error("damping must be nonnegative");
        damping_ = *cfg_.damping;
    } else {
        KahanSum tr;
        for (const auto& x : hessian_set_) tr.add(model_.example_hessian_trace(x));
        const double trace =
            tr.value() / static_cast<double>(hessian_set_.size()) + model_.ridge() * p;
        damping_ = 1e-3 * trace / static_cast<double>(p);
    }

    g_ref_ = reference_gradient(model_, task);

    if (cfg_.mode == InfluenceConfig::Mode::projected) {
        const std::size_t d = cfg_.projection_dim;
        if (d == 0) throw config_error("projection_dim must be positive");
        if (cfg_.identity_projection) {
            if (d != p)
                throw config_error(
                    "identity projection requires projection_dim == parameter count (" +
                    std::to_string(d) + " vs " + std::to_string(p) + ")");
        } else {
            Rng rng(derive_seed(cfg_.projection_seed, "gradient_projection"));
            projection_.resize(d * p);
            const double scale = 1.0 / std::sqrt(static_cast<double>(d));
            for (auto& v : projection_) v = rng.normal() * scale;
        }
        // Sketch the curvature once: rows h_i = H P_i, then (P H P')_ri = P_r . h_i.
        projected_hessian_.assign(d * d, 0.0);
        Vec basis(p, 0.0);
        Vec hrow(p, 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            if (projection_.empty()) {
                std::fill(basis.begin(), basis.end(), 0.0);
                basis[i] = 1.0;
            } else {
                for (std::size_t c = 0; c < p; ++c) basis[c] = projection_[i * p + c];
            }
            model_.objective_hessian_vec(hessian_set_, basis, hrow);
            if (projection_.empty()) {
                for (std::size_t r = 0; r < d; ++r) projected_hessian_[r * d + i] = hrow[r];
            } else {
                for (std::size_t r = 0; r < d; ++r) {
                    double s = 0.0;
                    for (std::size_t c = 0; c < p; ++c) s += projection_[r * p + c] * hrow[c];
                    projected_hessian_[r * d + i] = s;
                }
            }
        }
    }

    max_iters_ = cfg_.cg_max_iters;
}

Vec InfluenceCalculator::apply_projection(std::span<const double> v) const {
    if (projection_.empty()) return Vec(v.begin(), v.end());
    const std::size_t d = cfg_.projection_dim;
    const std::size_t p = model_.param_count();
    Vec out(d, 0.0);
    for (std::size_t r = 0; r < d; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < p; ++c) s += projection_[r * p + c] * v[c];
        out[r] = s;
    }
    return out;
}

void InfluenceCalculator::hessian_op(std::span<const double> v, std::span<double> out) const {
    model_.objective_hessian_vec(hessian_set_, v, out);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += damping_ * v[i];
}

Vec InfluenceCalculator::solve_exact(std::span<const double> rhs) const {
    const int iters = max_iters_ > 0 ? max_iters_
                                     : 10 * static_cast<int>(model_.param_count());
    auto op = [this](std::span<const double> v, std::span<double> out) {
        hessian_op(v, out);
    };
    return cg_solve(op, rhs, cfg_.cg_tolerance, iters).x;
}

Vec InfluenceCalculator::solve_projected(std::span<const double> rhs) const {
    const std::size_t d = cfg_.projection_dim;
    const int iters = max_iters_ > 0 ? max_iters_ : 10 * static_cast<int>(d);
    auto op = [this, d](std::span<const double> v, std::span<double> out) {
        for (std::size_t r = 0; r < d; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) s += projected_hessian_[r * d + c] * v[c];
            out[r] = s + damping_ * v[r];
        }
    };
    return cg_solve(op, rhs, cfg_.cg_tolerance, iters).x;
}

double InfluenceCalculator::exact(const Example& x) const {
    const Vec g_x = model_.example_gradient(x);
    const Vec v = solve_exact(g_x);
    return -dot(g_ref_, v);
}

double InfluenceCalculator::projected(const Example& x) const {
    if (cfg_.mode != InfluenceConfig::Mode::projected)
        throw config_error("projected influence requested from an exact-mode calculator");
    const Vec pg_x = apply_projection(model_.example_gradient(x));
    const Vec v = solve_projected(pg_x);
    const Vec pg_ref = apply_projection(g_ref_);
    return -dot(pg_ref, v);
}

double InfluenceCalculator::influence(const Example& x) const {
    return cfg_.mode == InfluenceConfig::Mode::projected ? projected(x) : exact(x);
}

std::vector<double> InfluenceCalculator::batch(std::span<const Example> xs) const {
    if (xs.empty()) throw data_error("batch influence over an empty id list");
    std::vector<double> out;
    out.reserve(xs.size());
    if (cfg_.mode == InfluenceConfig::Mode::projected) {
        const Vec v_ref = solve_projected(apply_projection(g_ref_));
        for (const auto& x : xs)
            out.push_back(-dot(v_ref, apply_projection(model_.example_gradient(x))));
    } else {
        const Vec v_ref = solve_exact(g_ref_);
        for (const auto& x : xs) out.push_back(-dot(v_ref, model_.example_gradient(x)));
    }
    return out;
}

std::unordered_map<Id, double> batch_rewards(const RewardModel& model,
                                             const ReferenceTask& task,
                                             std::span<const Id> ids, const Corpus& corpus,
                                             const InfluenceConfig& cfg) {
    if (ids.empty()) throw data_error("batch_rewards: empty id list");
    const auto hessian_set = corpus_examples(corpus);
    InfluenceCalculator calc(model, hessian_set, task, cfg);
    std::vector<Example> xs;
    xs.reserve(ids.size());
    for (Id id : ids) {
        if (id >= corpus.size())
            throw data_error("batch_rewards: id " + std::to_string(id) + " out of range");
        xs.push_back(to_example(corpus.points[id]));
    }
    const auto values = calc.batch(xs);
    std::unordered_map<Id, double> out;
    out.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]] = values[i];
    return out;
}

// ---------------------------------------------------------------------------
// RewardOracle

RewardOracle::RewardOracle(RewardModel model, const Corpus& corpus, ReferenceTask task,
                           InfluenceConfig cfg)
    : model_(std::move(model)), examples_(corpus_examples(corpus)), task_(std::move(task)),
      cfg_(cfg) {
    if (examples_.empty()) throw data_error("reward oracle needs a nonempty corpus");
}

std::unordered_map<Id, double> RewardOracle::rewards(std::span<const Id> ids) const {
    InfluenceCalculator calc(model_, examples_, task_, cfg_);
    std::vector<Example> xs;
    xs.reserve(ids.size());
    for (Id id : ids) {
        if (id >= examples_.size())
            throw data_error("reward oracle: id " + std::to_string(id) + " out of range");
        xs.push_back(examples_[id]);
    }
    const auto influence = calc.batch(xs);
    std::unordered_map<Id, double> out;
    out.reserve(ids.size());
    // The influence value estimates the reference-loss change from upweighting
    // the point, so the selection reward is its negation.
    for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]] = -influence[i];
    return out;
}

double RewardOracle::reference_loss() const { return model_.mean_loss(task_.points); }

double RewardOracle::train_loss(std::span<const Id> batch) const {
    std::vector<Example> xs;
    xs.reserve(batch.size());
    for (Id id : batch) xs.push_back(examples_.at(id));
    return model_.mean_loss(xs);
}

void RewardOracle::train_step(std::span<const Id> batch, double learning_rate) {
    if (batch.empty()) throw data_error("train_step: empty batch");
    std::vector<Example> xs;
    xs.reserve(batch.size());
    for (Id id : batch) xs.push_back(examples_.at(id));
    model_.sgd_step(xs, learning_rate);
}

}  // namespace dsel
