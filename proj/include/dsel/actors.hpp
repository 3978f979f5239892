#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "dsel/common.hpp"
#include "dsel/corpus.hpp"

namespace dsel {

/// Per-actor persistent state: one weight per subcategory, updated online by
/// a sliding average of observed rewards.
struct ActorMemory {
    std::string actor_id;
    std::vector<std::string> subcategories;
    Vec weights;
    double eta = 0.3;
    int stage_count = 0;

    void validate() const;
    int index_of(const std::string& subcategory) const;  // -1 when absent
};

ActorMemory make_actor(const std::string& actor_id, const LabelResolver& resolver,
                       double eta, double initial_weight = 0.5);

struct SubcategoryRewardReport {
    struct Entry {
        std::optional<double> mean_reward;  // present iff sample_count > 0
        std::size_t sample_count = 0;
    };
    std::string actor_id;
    int stage_index = 0;
    std::map<std::string, Entry> per_subcategory;
};

struct ActorSample {
    std::string actor_id;
    // Subcategory -> sampled point ids, in the actor's subcategory order.
    std::vector<std::pair<std::string, std::vector<Id>>> ids;
    std::vector<std::string> empty_subcategories;  // warning flags
    std::vector<Id> all_ids() const;
};

/// Samples up to m ids per subcategory uniformly without replacement.
/// Subcategories holding fewer than m points contribute everything they have;
/// empty ones contribute an empty list and a warning flag.
ActorSample actor_sample(const ActorMemory& actor, const Corpus& corpus,
                         const LabelResolver& resolver, std::size_t m,
                         std::uint64_t seed);

/// Per-subcategory mean of the sampled rewards. A sampled id without a reward
/// value is a data_error naming the id.
SubcategoryRewardReport compute_subcategory_reward(
    const ActorSample& sample, const std::unordered_map<Id, double>& rewards,
    int stage_index);

/// Sliding-average update: w_j <- (1 - eta) * w_j + eta * mean_j for every
/// subcategory with samples; unsampled subcategories keep their weight.
/// Non-finite means reject the whole update and leave the actor untouched.
ActorMemory actor_update(const ActorMemory& actor, const SubcategoryRewardReport& report);

/// Score of a point under this actor: the weight of the point's subcategory.
double actor_score(const ActorMemory& actor, const std::string& subcategory);
double actor_score(const ActorMemory& actor, const LabelResolver& resolver,
                   const DataPoint& point);

nlohmann::ordered_json actor_to_json(const ActorMemory& actor);
ActorMemory actor_from_json(const nlohmann::ordered_json& j);
void save_actor(const ActorMemory& actor, const std::string& path);
ActorMemory load_actor(const std::string& path);

}  // namespace dsel
