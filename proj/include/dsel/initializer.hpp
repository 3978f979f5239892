#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dsel/actors.hpp"
#include "dsel/common.hpp"
#include "dsel/corpus.hpp"

namespace dsel {

/// A point on the proportion simplex over one actor's subcategories.
struct MixtureConfig {
    std::string attribute;
    Vec proportions;  // nonnegative, sums to 1 within 1e-9
    int config_id = 0;

    void validate() const;
};

struct ProxyEvaluation {
    int config_id = 0;
    double validation_loss = 0.0;
    std::string evaluator_tag;
};

/// Stand-in for proxy-model training: maps a mixture to a validation loss.
using ProxyEvaluator = std::function<double(const MixtureConfig&)>;

enum class RegressorFamily { linear, quadratic_ridge };

RegressorFamily regressor_family_from_string(const std::string& s);
std::string to_string(RegressorFamily family);

struct FittedRegressor {
    RegressorFamily family = RegressorFamily::linear;
    std::size_t n_components = 0;
    Vec coefficients;
    double held_out_r2 = 0.0;

    double predict(const Vec& proportions) const;
};

/// Dirichlet draws centered on the natural proportions (alpha = concentration
/// * natural), with the natural mixture itself as config 0.
std::vector<MixtureConfig> sample_mixtures(std::size_t n_configs,
                                           const std::string& attribute,
                                           const Vec& natural_proportions,
                                           double concentration, std::uint64_t seed);

std::vector<ProxyEvaluation> evaluate_configs(const std::vector<MixtureConfig>& configs,
                                              const ProxyEvaluator& evaluator,
                                              const std::string& tag);

/// Least-squares fit of loss against mixture proportions (plain for the
/// linear family, ridge-regularized monomials for the quadratic family).
/// Fits on a seeded 80% split and reports R^2 on the held-out 20%.
FittedRegressor fit_regressor(const std::vector<MixtureConfig>& configs,
                              const std::vector<ProxyEvaluation>& evals,
                              RegressorFamily family, double ridge,
                              std::uint64_t split_seed);

/// Evaluates the regressor on the barycenter, every vertex and n_candidates
/// Dirichlet(1) draws, returning the predicted-loss argmin (earliest
/// candidate wins ties).
MixtureConfig search_best_mixture(const FittedRegressor& regressor, std::size_t n_candidates,
                                  std::uint64_t seed);

/// Seeds actor weights from the chosen mixture: proportions affinely rescaled
/// to [0,1] with the maximum at 1 for domain/topic-style actors; the quality
/// actor gets the fixed monotone ramp j/5.
ActorMemory initialize_actor_weights(const MixtureConfig& best, const ActorMemory& actor);

// Shipped closed-form proxy surfaces.
ProxyEvaluator linear_surface(Vec slope);
ProxyEvaluator quadratic_surface(Vec minimizer, double curvature, double floor_loss);
/// Loss decreasing in the mean planted alignment of the mixture; requires
/// planted generator metadata.
ProxyEvaluator alignment_surface(const Corpus& corpus, const std::string& attribute);

struct InitializerOutcome {
    std::vector<MixtureConfig> configs;
    std::vector<ProxyEvaluation> evaluations;
    FittedRegressor regressor;
    MixtureConfig best;
    ActorMemory actor;
};

struct InitializerParams {
    std::size_t n_configs = 512;
    double concentration = 5.0;
    RegressorFamily family = RegressorFamily::quadratic_ridge;
    double ridge = 1e-6;
    std::size_t n_candidates = 10000;
    std::uint64_t seed = 0;
};

/// Full sample -> evaluate -> fit -> search -> seed sequence for one actor.
InitializerOutcome run_initializer(const ActorMemory& actor, const Vec& natural_proportions,
                                   const ProxyEvaluator& evaluator,
                                   const std::string& evaluator_tag,
                                   const InitializerParams& params);

}  // namespace dsel
