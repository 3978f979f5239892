#include "dsel/initializer.hpp"

#include <algorithm>
#include <cmath>

#include "dsel/linalg.hpp"
#include "dsel/rng.hpp"

namespace dsel {

void MixtureConfig::validate() const {
    if (proportions.size() < 2)
        throw config_error("mixture needs at least two components");
    double sum = 0.0;
    for (double p : proportions) {
        if (p < 0.0) throw config_error("mixture contains a negative proportion");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw config_error("mixture proportions sum to " + fmt_double(sum) +
                           ", expected 1 within 1e-9");
}

RegressorFamily regressor_family_from_string(const std::string& s) {
    if (s == "linear") return RegressorFamily::linear;
    if (s == "quadratic" || s == "quadratic-ridge") return RegressorFamily::quadratic_ridge;
    throw config_error("unknown regressor family '" + s + "'");
}

std::string to_string(RegressorFamily family) {
    return family == RegressorFamily::linear ? "linear" : "quadratic-ridge";
}

namespace {

// Feature map: raw proportions for the linear family (the simplex constraint
// folds any intercept into the slopes); intercept + linear + upper-triangle
// quadratic monomials for the quadratic family.
Vec feature_map(RegressorFamily family, const Vec& p) {
    if (family == RegressorFamily::linear) return p;
    const std::size_t n = p.size();
    Vec f;
    f.reserve(1 + n + n * (n + 1) / 2);
    f.push_back(1.0);
    for (double v : p) f.push_back(v);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) f.push_back(p[i] * p[j]);
    return f;
}

Vec normalize_to_simplex(Vec v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    for (auto& x : v) x /= sum;
    return v;
}

}  // namespace

double FittedRegressor::predict(const Vec& proportions) const {
    if (proportions.size() != n_components)
        throw data_error("regressor trained on " + std::to_string(n_components) +
                         " components, given " + std::to_string(proportions.size()));
    const Vec f = feature_map(family, proportions);
    return dot(f, coefficients);
}

std::vector<MixtureConfig> sample_mixtures(std::size_t n_configs,
                                           const std::string& attribute,
                                           const Vec& natural_proportions,
                                           double concentration, std::uint64_t seed) {
    const std::size_t n = natural_proportions.size();
    if (n < 2) throw config_error("nothing to mix: attribute '" + attribute +
                                  "' has fewer than two subcategories");
    if (n_configs < n + 1)
        throw config_error("need at least " + std::to_string(n + 1) +
                           " configurations for " + std::to_string(n) + " components");
    if (!(concentration > 0.0)) throw config_error("concentration must be positive");

    MixtureConfig natural{attribute, natural_proportions, 0};
    natural.validate();

    Vec alpha(n);
    for (std::size_t i = 0; i < n; ++i)
        alpha[i] = std::max(concentration * natural_proportions[i], 1e-3);

    std::vector<MixtureConfig> configs;
    configs.reserve(n_configs);
    configs.push_back(std::move(natural));
    Rng rng(derive_seed(seed, "mixture_configs"));
    for (std::size_t c = 1; c < n_configs; ++c) {
        MixtureConfig m;
        m.attribute = attribute;
        m.proportions = normalize_to_simplex(rng.dirichlet(alpha));
        m.config_id = static_cast<int>(c);
        configs.push_back(std::move(m));
    }
    return configs;
}

std::vector<ProxyEvaluation> evaluate_configs(const std::vector<MixtureConfig>& configs,
                                              const ProxyEvaluator& evaluator,
                                              const std::string& tag) {
    std::vector<ProxyEvaluation> evals;
    evals.reserve(configs.size());
    for (const auto& c : configs) {
        ProxyEvaluation e;
        e.config_id = c.config_id;
        e.validation_loss = evaluator(c);
        e.evaluator_tag = tag;
        if (!std::isfinite(e.validation_loss))
            throw data_error("proxy evaluator returned a non-finite loss for config " +
                             std::to_string(c.config_id));
        evals.push_back(std::move(e));
    }
    return evals;
}

FittedRegressor fit_regressor(const std::vector<MixtureConfig>& configs,
                              const std::vector<ProxyEvaluation>& evals,
                              RegressorFamily family, double ridge,
                              std::uint64_t split_seed) {
    if (configs.size() != evals.size())
        throw data_error("fit_regressor: " + std::to_string(configs.size()) +
                         " configs but " + std::to_string(evals.size()) + " evaluations");
    if (configs.empty()) throw data_error("fit_regressor: no evaluations");
    const std::size_t n_comp = configs.front().proportions.size();
    if (configs.size() < n_comp + 1)
        throw data_error("fit_regressor: need at least " + std::to_string(n_comp + 1) +
                         " evaluations for identifiability");
    {
        std::vector<int> ids;
        for (const auto& e : evals) ids.push_back(e.config_id);
        std::sort(ids.begin(), ids.end());
        if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
            throw data_error("fit_regressor: duplicate config ids");
    }

    // Seeded 80/20 split; coefficients come from the training side, R^2 from
    // the held-out side.
    std::vector<std::size_t> order(configs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(split_seed, "regressor_split"));
    rng.shuffle(order);
    std::size_t n_test = std::max<std::size_t>(1, configs.size() / 5);
    if (configs.size() - n_test < n_comp + 1) n_test = configs.size() - (n_comp + 1);

    const std::size_t dim = feature_map(family, configs.front().proportions).size();
    Vec xtx(dim * dim, 0.0);
    Vec xty(dim, 0.0);
    for (std::size_t i = n_test; i < order.size(); ++i) {
        const Vec f = feature_map(family, configs[order[i]].proportions);
        const double y = evals[order[i]].validation_loss;
        for (std::size_t r = 0; r < dim; ++r) {
            xty[r] += f[r] * y;
            for (std::size_t c = 0; c < dim; ++c) xtx[r * dim + c] += f[r] * f[c];
        }
    }

    const bool regularized = family == RegressorFamily::quadratic_ridge;
    auto attempt = [&](double lambda) {
        Vec a = xtx;
        if (regularized)
            for (std::size_t i = 1; i < dim; ++i) a[i * dim + i] += lambda;  // intercept free
        return cholesky_solve(std::move(a), dim, xty);
    };

    FittedRegressor fit;
    fit.family = family;
    fit.n_components = n_comp;
    try {
        fit.coefficients = attempt(regularized ? ridge : 0.0);
    } catch (const solver_error&) {
        if (!regularized)
            throw solver_error("fit_regressor: rank-deficient design for the linear family");
        try {
            fit.coefficients = attempt(std::max(ridge, 1e-12) * 1e6);
        } catch (const solver_error&) {
            throw solver_error("fit_regressor: design rank-deficient beyond ridge rescue");
        }
    }

    KahanSum mean;
    for (std::size_t i = 0; i < n_test; ++i) mean.add(evals[order[i]].validation_loss);
    const double ybar = mean.value() / static_cast<double>(n_test);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < n_test; ++i) {
        const double y = evals[order[i]].validation_loss;
        const double yhat = fit.predict(configs[order[i]].proportions);
        ss_res += (y - yhat) * (y - yhat);
        ss_tot += (y - ybar) * (y - ybar);
    }
    fit.held_out_r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res < 1e-18 ? 1.0 : 0.0);
    return fit;
}

MixtureConfig search_best_mixture(const FittedRegressor& regressor, std::size_t n_candidates,
                                  std::uint64_t seed) {
    const std::size_t n = regressor.n_components;
    if (n < 2) throw config_error("regressor has no components to search");

    // Global scan: barycenter first, then vertices, then flat Dirichlet draws.
    // Ties keep the earliest candidate.
    std::vector<Vec> candidates;
    candidates.reserve(1 + n + n_candidates);
    candidates.push_back(Vec(n, 1.0 / static_cast<double>(n)));
    for (std::size_t i = 0; i < n; ++i) {
        Vec v(n, 0.0);
        v[i] = 1.0;
        candidates.push_back(std::move(v));
    }
    Rng rng(derive_seed(seed, "mixture_search"));
    const Vec flat(n, 1.0);
    for (std::size_t i = 0; i < n_candidates; ++i)
        candidates.push_back(normalize_to_simplex(rng.dirichlet(flat)));

    std::size_t best = 0;
    Vec best_proportions = candidates[0];
    double best_loss = regressor.predict(candidates[0]);
    std::size_t index = 0;
    auto consider = [&](const Vec& p) {
        const double loss = regressor.predict(p);
        if (loss < best_loss) {
            best_loss = loss;
            best = index;
            best_proportions = p;
        }
        ++index;
    };
    for (const auto& c : candidates) consider(c);

    // Uniform draws alone cannot pin the argmin down in a higher-dimensional
    // simplex, so sharpen with Dirichlet rounds concentrated on the incumbent.
    // Strict improvement keeps every tie convention from the global scan.
    const std::size_t per_round = std::max<std::size_t>(200, n_candidates / 5);
    double concentration = 50.0;
    Vec alpha(n);
    for (int round = 0; round < 7; ++round) {
        for (std::size_t i = 0; i < n; ++i)
            alpha[i] = concentration * (best_proportions[i] + 1e-3);
        for (std::size_t i = 0; i < per_round; ++i)
            consider(normalize_to_simplex(rng.dirichlet(alpha)));
        concentration *= 4.0;
    }

    MixtureConfig out;
    out.proportions = best_proportions;
    out.config_id = static_cast<int>(best);
    return out;
}

ActorMemory initialize_actor_weights(const MixtureConfig& best, const ActorMemory& actor) {
    if (best.attribute != actor.actor_id)
        throw config_error("mixture for attribute '" + best.attribute +
                           "' cannot initialize actor '" + actor.actor_id + "'");
    ActorMemory out = actor;
    out.stage_count = 0;
    if (actor.actor_id == "quality") {
        // Monotone ramp: higher intervals start out preferred.
        const double n = static_cast<double>(actor.subcategories.size());
        for (std::size_t j = 0; j < out.weights.size(); ++j)
            out.weights[j] = static_cast<double>(j + 1) / n;
        return out;
    }
    if (best.proportions.size() != actor.subcategories.size())
        throw config_error("mixture over " + std::to_string(best.proportions.size()) +
                           " components cannot initialize actor '" + actor.actor_id +
                           "' with " + std::to_string(actor.subcategories.size()) +
                           " subcategories");
    const double lo = *std::min_element(best.proportions.begin(), best.proportions.end());
    const double hi = *std::max_element(best.proportions.begin(), best.proportions.end());
    if (hi - lo < 1e-15) {
        std::fill(out.weights.begin(), out.weights.end(), 1.0);
        return out;
    }
    for (std::size_t j = 0; j < out.weights.size(); ++j)
        out.weights[j] = (best.proportions[j] - lo) / (hi - lo);
    return out;
}

ProxyEvaluator linear_surface(Vec slope) {
    return [slope = std::move(slope)](const MixtureConfig& m) {
        if (m.proportions.size() != slope.size())
            throw data_error("linear surface dimension mismatch");
        return dot(slope, m.proportions);
    };
}

ProxyEvaluator quadratic_surface(Vec minimizer, double curvature, double floor_loss) {
    return [minimizer = std::move(minimizer), curvature,
            floor_loss](const MixtureConfig& m) {
        if (m.proportions.size() != minimizer.size())
            throw data_error("quadratic surface dimension mismatch");
        double s = 0.0;
        for (std::size_t i = 0; i < minimizer.size(); ++i) {
            const double d = m.proportions[i] - minimizer[i];
            s += d * d;
        }
        return floor_loss + curvature * s;
    };
}

ProxyEvaluator alignment_surface(const Corpus& corpus, const std::string& attribute) {
    if (!corpus.metadata.contains("generator"))
        throw data_error("corpus metadata carries no generator spec; cannot build the "
                         "alignment proxy surface");
    const auto spec = GeneratorSpec::from_json(corpus.metadata["generator"]);
    const auto resolver = make_resolver(attribute, corpus);
    const auto groups = group_by_subcategory(corpus, resolver);
    Vec mean_alignment(groups.size(), 0.0);
    for (std::size_t j = 0; j < groups.size(); ++j) {
        const auto& ids = groups[j].second;
        if (ids.empty()) continue;
        KahanSum sum;
        for (Id id : ids) {
            const auto& p = corpus.points[id];
            sum.add(planted_alignment(spec, p.domain, p.quality_interval, p.topic));
        }
        mean_alignment[j] = sum.value() / static_cast<double>(ids.size());
    }
    return [mean_alignment = std::move(mean_alignment)](const MixtureConfig& m) {
        if (m.proportions.size() != mean_alignment.size())
            throw data_error("alignment surface dimension mismatch");
        return -dot(mean_alignment, m.proportions);
    };
}

InitializerOutcome run_initializer(const ActorMemory& actor, const Vec& natural_proportions,
                                   const ProxyEvaluator& evaluator,
                                   const std::string& evaluator_tag,
                                   const InitializerParams& params) {
    InitializerOutcome out;
    out.configs = sample_mixtures(params.n_configs, actor.actor_id, natural_proportions,
                                  params.concentration, params.seed);
    out.evaluations = evaluate_configs(out.configs, evaluator, evaluator_tag);
    out.regressor = fit_regressor(out.configs, out.evaluations, params.family, params.ridge,
                                  params.seed);
    out.best = search_best_mixture(out.regressor, params.n_candidates, params.seed);
    out.best.attribute = actor.actor_id;
    out.actor = initialize_actor_weights(out.best, actor);
    return out;
}

}  // namespace dsel
