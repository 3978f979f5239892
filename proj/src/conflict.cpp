#include "dsel/conflict.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace dsel {

const ConflictCell* ConflictReport::find(const std::string& domain, int interval) const {
    for (const auto& c : cells)
        if (c.domain == domain && c.quality_interval == interval) return &c;
    return nullptr;
}

std::string ConflictReport::to_csv() const {
    std::ostringstream out;
    out << "stage,domain,quality_interval,count,topic_entropy,max_topic_share,"
           "mean_influence,mean_influence_normalized\n";
    auto field = [](const std::optional<double>& v) {
        return v ? fmt_double(*v) : std::string();
    };
    for (const auto& c : cells) {
        out << stage_index << ',' << c.domain << ',' << c.quality_interval << ',' << c.count
            << ',' << field(c.topic_entropy) << ',' << field(c.max_topic_share) << ','
            << field(c.mean_reward) << ',' << field(c.influence_norm) << '\n';
    }
    return out.str();
}

nlohmann::ordered_json ConflictReport::to_json() const {
    nlohmann::ordered_json j;
    j["stage"] = stage_index;
    j["cells"] = nlohmann::ordered_json::array();
    for (const auto& c : cells) {
        nlohmann::ordered_json cell;
        cell["domain"] = c.domain;
        cell["quality_interval"] = c.quality_interval;
        cell["count"] = c.count;
        cell["topic_entropy"] = c.topic_entropy ? nlohmann::ordered_json(*c.topic_entropy)
                                                : nlohmann::ordered_json(nullptr);
        cell["max_topic_share"] = c.max_topic_share
                                      ? nlohmann::ordered_json(*c.max_topic_share)
                                      : nlohmann::ordered_json(nullptr);
        cell["mean_influence"] = c.mean_reward ? nlohmann::ordered_json(*c.mean_reward)
                                               : nlohmann::ordered_json(nullptr);
        cell["mean_influence_normalized"] =
            c.influence_norm ? nlohmann::ordered_json(*c.influence_norm)
                             : nlohmann::ordered_json(nullptr);
        j["cells"].push_back(cell);
    }
    return j;
}

ConflictReport build_conflict_report(const Corpus& corpus, const RewardOracle& oracle,
                                     int stage_index) {
    if (corpus.size() == 0) throw data_error("conflict report over an empty corpus");

    std::vector<Id> all_ids(corpus.size());
    for (std::size_t i = 0; i < all_ids.size(); ++i) all_ids[i] = static_cast<Id>(i);
    const auto rewards = oracle.rewards(all_ids);

    struct Accum {
        std::size_t count = 0;
        KahanSum reward;
        std::map<std::string, std::size_t> topics;
    };
    std::map<std::pair<std::string, int>, Accum> cells;
    for (const auto& dom : corpus.domain_labels)
        for (int j = 1; j <= 5; ++j) cells[{dom, j}];  // emit empty cells too

    for (const auto& p : corpus.points) {
        auto& cell = cells[{p.domain, p.quality_interval}];
        cell.count++;
        cell.reward.add(rewards.at(p.id));
        cell.topics[p.topic]++;
    }

    const double log_topics = std::log(static_cast<double>(corpus.topic_labels.size()));

    ConflictReport report;
    report.stage_index = stage_index;
    for (const auto& dom : corpus.domain_labels) {
        for (int j = 1; j <= 5; ++j) {
            const auto& acc = cells.at({dom, j});
            ConflictCell cell;
            cell.domain = dom;
            cell.quality_interval = j;
            cell.count = acc.count;
            if (acc.count > 0) {
                cell.mean_reward = acc.reward.value() / static_cast<double>(acc.count);
                double entropy = 0.0;
                double max_share = 0.0;
                for (const auto& [topic, n] : acc.topics) {
                    const double share = static_cast<double>(n) / static_cast<double>(acc.count);
                    max_share = std::max(max_share, share);
                    if (share > 0.0) entropy -= share * std::log(share);
                }
                cell.topic_entropy = log_topics > 0.0 ? entropy / log_topics : 0.0;
                cell.max_topic_share = max_share;
            }
            report.cells.push_back(std::move(cell));
        }
    }

    // Min-max normalization of the mean influence across populated cells.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& c : report.cells) {
        if (!c.mean_reward) continue;
        lo = std::min(lo, *c.mean_reward);
        hi = std::max(hi, *c.mean_reward);
    }
    for (auto& c : report.cells) {
        if (!c.mean_reward) continue;
        c.influence_norm = hi > lo ? (*c.mean_reward - lo) / (hi - lo) : 1.0;
    }
    return report;
}

}  // namespace dsel
