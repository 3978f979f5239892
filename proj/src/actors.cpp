#include "dsel/actors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dsel/rng.hpp"

namespace dsel {

void ActorMemory::validate() const {
    if (actor_id.empty()) throw data_error("actor has an empty id");
    if (weights.size() != subcategories.size())
        throw data_error("actor '" + actor_id + "' has " + std::to_string(weights.size()) +
                         " weights for " + std::to_string(subcategories.size()) +
                         " subcategories");
    for (double w : weights)
        if (!std::isfinite(w))
            throw data_error("actor '" + actor_id + "' holds a non-finite weight");
    if (!(eta >= 0.0 && eta <= 1.0))
        throw data_error("actor '" + actor_id + "' has eta outside [0,1]");
}

int ActorMemory::index_of(const std::string& subcategory) const {
    auto it = std::find(subcategories.begin(), subcategories.end(), subcategory);
    return it == subcategories.end() ? -1
                                     : static_cast<int>(it - subcategories.begin());
}

ActorMemory make_actor(const std::string& actor_id, const LabelResolver& resolver,
                       double eta, double initial_weight) {
    ActorMemory a;
    a.actor_id = actor_id;
    a.subcategories = resolver.subcategories;
    a.weights.assign(a.subcategories.size(), initial_weight);
    a.eta = eta;
    a.stage_count = 0;
    a.validate();
    return a;
}

std::vector<Id> ActorSample::all_ids() const {
    std::vector<Id> out;
    for (const auto& [sub, list] : ids) out.insert(out.end(), list.begin(), list.end());
    return out;
}

ActorSample actor_sample(const ActorMemory& actor, const Corpus& corpus,
                         const LabelResolver& resolver, std::size_t m,
                         std::uint64_t seed) {
    if (m == 0) throw config_error("actor_sample: m must be at least 1");
    if (actor.subcategories != resolver.subcategories)
        throw data_error("actor '" + actor.actor_id +
                         "' subcategories do not match resolver '" + resolver.attribute + "'");

    const auto groups = group_by_subcategory(corpus, resolver);
    ActorSample sample;
    sample.actor_id = actor.actor_id;
    Rng rng(seed);
    for (const auto& [sub, pool] : groups) {
        if (pool.empty()) {
            sample.empty_subcategories.push_back(sub);
            sample.ids.emplace_back(sub, std::vector<Id>{});
            continue;
        }
        std::vector<Id> chosen;
        if (pool.size() <= m) {
            chosen = pool;  // exhaustion: take everything
        } else {
            auto idx = rng.sample_without_replacement(pool.size(), m);
            chosen.reserve(m);
            for (std::size_t i : idx) chosen.push_back(pool[i]);
        }
        sample.ids.emplace_back(sub, std::move(chosen));
    }
    return sample;
}

SubcategoryRewardReport compute_subcategory_reward(
    const ActorSample& sample, const std::unordered_map<Id, double>& rewards,
    int stage_index) {
    SubcategoryRewardReport report;
    report.actor_id = sample.actor_id;
    report.stage_index = stage_index;
    for (const auto& [sub, list] : sample.ids) {
        SubcategoryRewardReport::Entry entry;
        entry.sample_count = list.size();
        if (!list.empty()) {
            KahanSum sum;
            for (Id id : list) {
                auto it = rewards.find(id);
                if (it == rewards.end())
                    throw data_error("no reward value for sampled id " + std::to_string(id));
                sum.add(it->second);
            }
            entry.mean_reward = sum.value() / static_cast<double>(list.size());
        }
        report.per_subcategory.emplace(sub, entry);
    }
    return report;
}

ActorMemory actor_update(const ActorMemory& actor, const SubcategoryRewardReport& report) {
    if (report.actor_id != actor.actor_id)
        throw data_error("report for actor '" + report.actor_id +
                         "' applied to actor '" + actor.actor_id + "'");
    // Validate everything before touching any weight so a bad report leaves
    // the actor unchanged.
    for (const auto& [sub, entry] : report.per_subcategory) {
        if (actor.index_of(sub) < 0)
            throw data_error("report names subcategory '" + sub +
                             "' unknown to actor '" + actor.actor_id + "'");
        if (entry.sample_count > 0 &&
            (!entry.mean_reward || !std::isfinite(*entry.mean_reward)))
            throw data_error("non-finite mean reward for subcategory '" + sub +
                             "' of actor '" + actor.actor_id + "'");
    }
    ActorMemory updated = actor;
    for (const auto& [sub, entry] : report.per_subcategory) {
        if (entry.sample_count == 0) continue;
        const int j = updated.index_of(sub);
        updated.weights[j] =
            (1.0 - updated.eta) * updated.weights[j] + updated.eta * (*entry.mean_reward);
    }
    updated.stage_count = actor.stage_count + 1;
    return updated;
}

double actor_score(const ActorMemory& actor, const std::string& subcategory) {
    const int j = actor.index_of(subcategory);
    if (j < 0)
        throw data_error("actor '" + actor.actor_id + "' cannot score label '" +
                         subcategory + "'");
    return actor.weights[j];
}

double actor_score(const ActorMemory& actor, const LabelResolver& resolver,
                   const DataPoint& point) {
    return actor_score(actor, resolver.label_of(point));
}

nlohmann::ordered_json actor_to_json(const ActorMemory& actor) {
    nlohmann::ordered_json j;
    j["actor_id"] = actor.actor_id;
    j["subcategories"] = actor.subcategories;
    j["weights"] = actor.weights;
    j["eta"] = actor.eta;
    j["stage_count"] = actor.stage_count;
    return j;
}

ActorMemory actor_from_json(const nlohmann::ordered_json& j) {
    ActorMemory a;
    try {
        a.actor_id = j.at("actor_id").get<std::string>();
        a.subcategories = j.at("subcategories").get<std::vector<std::string>>();
        a.weights = j.at("weights").get<Vec>();
        a.eta = j.at("eta").get<double>();
        a.stage_count = j.at("stage_count").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("invalid actor memory: ") + e.what());
    }
    a.validate();
    return a;
}

void save_actor(const ActorMemory& actor, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << actor_to_json(actor).dump(2) << '\n';
    if (!out) throw io_error("failed while writing '" + path + "'");
}

ActorMemory load_actor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open actor memory '" + path + "'");
    try {
        return actor_from_json(nlohmann::ordered_json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw io_error("invalid actor memory '" + path + "': " + e.what());
    }
}

}  // namespace dsel
