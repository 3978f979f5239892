#pragma once

#include <fstream>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsel/actors.hpp"
#include "dsel/common.hpp"
#include "dsel/corpus.hpp"
#include "dsel/reward.hpp"

namespace dsel {

enum class Regime { collaborative, competitive, single };

std::string to_string(Regime regime);

// How the per-actor aggregate divides the weighted subcategory rewards:
// by the number of sampled subcategories or by the actor's full subcategory
// count.
enum class AggregateNorm { sampled_subcategories, all_subcategories };

struct ConsoleState {
    // Insertion order fixes actor order everywhere downstream.
    std::vector<std::string> actor_order;
    std::map<std::string, double> thetas;
    double eta = 0.1;
    Regime regime = Regime::collaborative;
    std::string active_actor;  // regime single only

    struct StageRecord {
        int stage = 0;
        std::map<std::string, double> thetas;
        std::map<std::string, double> aggregates;
        double mean_aggregate = 0.0;
    };
    std::vector<StageRecord> history;

    void validate(std::span<const ActorMemory> actors) const;
};

/// Uniform collaborative weights (1/n per actor).
ConsoleState make_console_state(const std::vector<std::string>& actor_ids, double eta,
                                Regime regime = Regime::collaborative,
                                const std::string& active_actor = "");

/// Fused score: collaborative sums theta_A * S_A over registered actors;
/// single uses the active actor alone; competitive uses the actor holding the
/// largest theta (first registered wins ties).
double console_score(const ConsoleState& state, std::span<const ActorMemory> actors,
                     std::span<const LabelResolver> resolvers, const DataPoint& point);

/// Scores every corpus point (same order as corpus.points).
Vec score_corpus(const ConsoleState& state, std::span<const ActorMemory> actors,
                 std::span<const LabelResolver> resolvers, const Corpus& corpus);

/// Weighted mean of the actor's sampled subcategory rewards:
/// (1/n) sum_j w_j * mean_j, with n per AggregateNorm. Errors when the report
/// holds no sampled subcategories.
double actor_aggregate_reward(const ActorMemory& actor, const SubcategoryRewardReport& report,
                              AggregateNorm norm = AggregateNorm::sampled_subcategories);

/// theta_A += eta * (R_A - mean R). The deltas are computed as pairwise
/// differences so equal aggregates leave every theta bit-identical, and the
/// theta total is conserved up to roundoff. Non-finite aggregates reject the
/// update atomically.
void console_update(ConsoleState& state, const std::map<std::string, double>& aggregates,
                    int stage);

/// The k ids with the highest scores; ties break toward the smaller id, and
/// the result is ordered by descending score then ascending id.
std::vector<Id> select_top_k(std::span<const std::pair<Id, double>> scores, std::size_t k);
std::vector<Id> select_top_k(const std::map<Id, double>& scores, std::size_t k);

// ---------------------------------------------------------------------------
// Pipeline

enum class SelectionPolicy { top_k, random };

struct PipelineConfig {
    long total_steps = 750;       // T
    long update_every = 150;      // U
    std::size_t select_k = 2000;  // k
    std::size_t batch_size = 32;
    std::size_t probe_per_subcategory = 500;  // m
    double learning_rate = 0.05;
    std::uint64_t seed = 17;
    SelectionPolicy policy = SelectionPolicy::top_k;
    AggregateNorm aggregate_norm = AggregateNorm::sampled_subcategories;
    bool dynamic_theta = true;  // false freezes collaborative weights

    void validate(std::size_t corpus_size) const;
    long stage_count() const { return total_steps / update_every; }
};

struct EventSink {
    virtual ~EventSink() = default;
    virtual void record(const nlohmann::ordered_json& event) = 0;
};

struct VectorSink : EventSink {
    std::vector<std::string> lines;
    void record(const nlohmann::ordered_json& event) override { lines.push_back(event.dump()); }
};

/// Write-through JSONL sink; every record is flushed so an aborted run keeps
/// its log up to the failure point.
struct FileSink : EventSink {
    explicit FileSink(const std::string& path);
    void record(const nlohmann::ordered_json& event) override;

private:
    std::ofstream out_;
    std::string path_;
};

struct StageSummary {
    int stage = 0;
    long step = 0;
    std::map<std::string, double> thetas;
    std::map<std::string, double> aggregates;
    std::string selection_digest;
    // actor -> subcategory -> count of selected points
    std::map<std::string, std::map<std::string, std::size_t>> selection_composition;
};

struct PipelineResult {
    std::vector<ActorMemory> actors;
    ConsoleState console;
    std::vector<Id> selection;  // final D_k
    std::vector<StageSummary> stages;
    double final_reference_loss = 0.0;
    long steps_run = 0;
};

using StageCallback =
    std::function<void(int stage, std::span<const ActorMemory>, const ConsoleState&)>;

/// Runs the staged selection loop: every U steps each actor probes the pool,
/// rewards are computed against the live model, actor and collaborative
/// weights update, the pool is rescored and the next top-k subset selected;
/// every step trains the model on a batch from the current subset.
PipelineResult run_pipeline(const Corpus& corpus, std::vector<ActorMemory> actors,
                            std::vector<LabelResolver> resolvers, ConsoleState console,
                            RewardOracle& oracle, const PipelineConfig& cfg,
                            EventSink* sink = nullptr,
                            const StageCallback& on_stage = {});

}  // namespace dsel
