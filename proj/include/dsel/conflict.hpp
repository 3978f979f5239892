#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsel/common.hpp"
#include "dsel/corpus.hpp"
#include "dsel/reward.hpp"

namespace dsel {

/// One (domain, quality interval) cell of the conflict analysis.
struct ConflictCell {
    std::string domain;
    int quality_interval = 1;
    std::size_t count = 0;
    // Shannon entropy of the cell's topic mix, normalized by log(#topics).
    std::optional<double> topic_entropy;
    std::optional<double> max_topic_share;
    std::optional<double> mean_reward;
    // Min-max normalization of mean_reward across this report's cells.
    std::optional<double> influence_norm;
};

struct ConflictReport {
    int stage_index = 0;
    std::vector<ConflictCell> cells;  // domain-major, interval-minor order

    const ConflictCell* find(const std::string& domain, int interval) const;
    std::string to_csv() const;
    nlohmann::ordered_json to_json() const;
};

/// Scores every corpus point with the oracle's reward (loss-reduction
/// oriented) and aggregates per (domain, interval) cell. Empty cells are
/// emitted with count 0 and null metrics.
ConflictReport build_conflict_report(const Corpus& corpus, const RewardOracle& oracle,
                                     int stage_index);

}  // namespace dsel
