#include "dsel/console.hpp"

#include <algorithm>
#include <cmath>

#include "dsel/rng.hpp"

namespace dsel {

std::string to_string(Regime regime) {
    switch (regime) {
        case Regime::collaborative: return "collaborative";
        case Regime::competitive: return "competitive";
        case Regime::single: return "single";
    }
    return "unknown";
}

void ConsoleState::validate(std::span<const ActorMemory> actors) const {
    if (actor_order.size() != thetas.size() || actor_order.size() != actors.size())
        throw data_error("console registers " + std::to_string(thetas.size()) +
                         " actors, pipeline supplies " + std::to_string(actors.size()));
    for (const auto& a : actors) {
        auto it = thetas.find(a.actor_id);
        if (it == thetas.end())
            throw data_error("console has no collaborative weight for actor '" + a.actor_id +
                             "'");
        if (!std::isfinite(it->second))
            throw data_error("non-finite collaborative weight for actor '" + a.actor_id + "'");
    }
    if (regime == Regime::single) {
        if (thetas.find(active_actor) == thetas.end())
            throw data_error("single regime names unregistered actor '" + active_actor + "'");
    }
}

ConsoleState make_console_state(const std::vector<std::string>& actor_ids, double eta,
                                Regime regime, const std::string& active_actor) {
    if (actor_ids.empty()) throw config_error("console needs at least one actor");
    ConsoleState s;
    s.actor_order = actor_ids;
    const double uniform = 1.0 / static_cast<double>(actor_ids.size());
    for (const auto& id : actor_ids) {
        if (!s.thetas.emplace(id, uniform).second)
            throw config_error("duplicate actor id '" + id + "'");
    }
    s.eta = eta;
    s.regime = regime;
    s.active_actor = active_actor;
    if (regime == Regime::single && s.thetas.find(active_actor) == s.thetas.end())
        throw config_error("single regime names unknown actor '" + active_actor + "'");
    return s;
}

namespace {

std::size_t competitive_choice(const ConsoleState& state) {
    std::size_t best = 0;
    double best_theta = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < state.actor_order.size(); ++i) {
        const double t = state.thetas.at(state.actor_order[i]);
        if (t > best_theta) {
            best_theta = t;
            best = i;
        }
    }
    return best;
}

}  // namespace

double console_score(const ConsoleState& state, std::span<const ActorMemory> actors,
                     std::span<const LabelResolver> resolvers, const DataPoint& point) {
    if (actors.size() != resolvers.size())
        throw data_error("actor/resolver count mismatch");
    switch (state.regime) {
        case Regime::single: {
            for (std::size_t i = 0; i < actors.size(); ++i)
                if (actors[i].actor_id == state.active_actor)
                    return actor_score(actors[i], resolvers[i], point);
            throw data_error("active actor '" + state.active_actor + "' is not registered");
        }
        case Regime::competitive: {
            const std::size_t i = competitive_choice(state);
            return actor_score(actors[i], resolvers[i], point);
        }
        case Regime::collaborative: {
            double s = 0.0;
            for (std::size_t i = 0; i < actors.size(); ++i)
                s += state.thetas.at(actors[i].actor_id) *
                     actor_score(actors[i], resolvers[i], point);
            return s;
        }
    }
    return 0.0;
}

Vec score_corpus(const ConsoleState& state, std::span<const ActorMemory> actors,
                 std::span<const LabelResolver> resolvers, const Corpus& corpus) {
    Vec scores(corpus.size(), 0.0);
    for (std::size_t i = 0; i < corpus.size(); ++i)
        scores[i] = console_score(state, actors, resolvers, corpus.points[i]);
    return scores;
}

double actor_aggregate_reward(const ActorMemory& actor, const SubcategoryRewardReport& report,
                              AggregateNorm norm) {
    if (report.actor_id != actor.actor_id)
        throw data_error("aggregate for actor '" + actor.actor_id + "' given report for '" +
                         report.actor_id + "'");
    KahanSum sum;
    std::size_t sampled = 0;
    for (const auto& [sub, entry] : report.per_subcategory) {
        const int j = actor.index_of(sub);
        if (j < 0)
            throw data_error("report names subcategory '" + sub + "' unknown to actor '" +
                             actor.actor_id + "'");
        if (entry.sample_count == 0) continue;
        sum.add(actor.weights[j] * (*entry.mean_reward));
        ++sampled;
    }
    if (sampled == 0)
        throw data_error("actor '" + actor.actor_id +
                         "' has no sampled subcategories; aggregate reward is undefined");
    const std::size_t n = norm == AggregateNorm::sampled_subcategories
                              ? sampled
                              : actor.subcategories.size();
    return sum.value() / static_cast<double>(n);
}

void console_update(ConsoleState& state, const std::map<std::string, double>& aggregates,
                    int stage) {
    for (const auto& id : state.actor_order) {
        auto it = aggregates.find(id);
        if (it == aggregates.end())
            throw data_error("console update missing aggregate for actor '" + id + "'");
        if (!std::isfinite(it->second))
            throw data_error("non-finite aggregate reward for actor '" + id + "'");
    }
    const double n = static_cast<double>(state.actor_order.size());

    // Deltas as mean pairwise differences: algebraically eta * (R_A - mean R),
    // but exactly zero when all aggregates coincide.
    std::map<std::string, double> deltas;
    for (const auto& a : state.actor_order) {
        const double ra = aggregates.at(a);
        KahanSum diff;
        for (const auto& b : state.actor_order) diff.add(ra - aggregates.at(b));
        deltas[a] = diff.value() / n;
    }

    ConsoleState::StageRecord rec;
    rec.stage = stage;
    rec.aggregates = aggregates;
    KahanSum mean;
    for (const auto& [id, r] : aggregates) mean.add(r);
    rec.mean_aggregate = mean.value() / n;

    for (const auto& id : state.actor_order) state.thetas[id] += state.eta * deltas[id];
    rec.thetas = state.thetas;
    state.history.push_back(std::move(rec));
}

std::vector<Id> select_top_k(std::span<const std::pair<Id, double>> scores, std::size_t k) {
    if (k > scores.size())
        throw std::out_of_range("select_top_k: k=" + std::to_string(k) + " exceeds " +
                                std::to_string(scores.size()) + " scores");
    std::vector<std::pair<Id, double>> work(scores.begin(), scores.end());
    auto better = [](const std::pair<Id, double>& a, const std::pair<Id, double>& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    };
    if (k < work.size())
        std::nth_element(work.begin(), work.begin() + k, work.end(), better);
    std::sort(work.begin(), work.begin() + k, better);
    std::vector<Id> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(work[i].first);
    return out;
}

std::vector<Id> select_top_k(const std::map<Id, double>& scores, std::size_t k) {
    std::vector<std::pair<Id, double>> v(scores.begin(), scores.end());
    return select_top_k(v, k);
}

// ---------------------------------------------------------------------------
// Pipeline

void PipelineConfig::validate(std::size_t corpus_size) const {
    if (total_steps < 1) throw config_error("T must be at least 1");
    if (update_every < 1) throw config_error("U must be at least 1");
    if (select_k < 1 || select_k > corpus_size)
        throw config_error("k must lie in [1, corpus size]; got " + std::to_string(select_k) +
                           " for " + std::to_string(corpus_size) + " points");
    if (batch_size < 1) throw config_error("batch_size must be at least 1");
    if (probe_per_subcategory < 1) throw config_error("probe size m must be at least 1");
    if (!(learning_rate > 0.0)) throw config_error("learning_rate must be positive");
}

FileSink::FileSink(const std::string& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw io_error("cannot open event log '" + path + "' for writing");
}

void FileSink::record(const nlohmann::ordered_json& event) {
    out_ << event.dump() << '\n';
    out_.flush();
    if (!out_) throw io_error("failed while writing event log '" + path_ + "'");
}

namespace {

nlohmann::ordered_json theta_json(const ConsoleState& state) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& id : state.actor_order) j[id] = state.thetas.at(id);
    return j;
}

void emit(EventSink* sink, const nlohmann::ordered_json& event) {
    if (sink) sink->record(event);
}

}  // namespace

PipelineResult run_pipeline(const Corpus& corpus, std::vector<ActorMemory> actors,
                            std::vector<LabelResolver> resolvers, ConsoleState console,
                            RewardOracle& oracle, const PipelineConfig& cfg,
                            EventSink* sink, const StageCallback& on_stage) {
    cfg.validate(corpus.size());
    console.validate(actors);
    if (actors.size() != resolvers.size())
        throw data_error("run_pipeline: actor/resolver count mismatch");
    for (std::size_t i = 0; i < actors.size(); ++i)
        if (actors[i].actor_id != console.actor_order[i])
            throw data_error("actor order does not match console registration");

    nlohmann::ordered_json start;
    start["type"] = "run_start";
    start["T"] = cfg.total_steps;
    start["U"] = cfg.update_every;
    start["k"] = cfg.select_k;
    start["batch_size"] = cfg.batch_size;
    start["probe_m"] = cfg.probe_per_subcategory;
    start["learning_rate"] = cfg.learning_rate;
    start["seed"] = cfg.seed;
    start["policy"] = cfg.policy == SelectionPolicy::top_k ? "topk" : "random";
    start["regime"] = to_string(console.regime);
    if (console.regime == Regime::single) start["active_actor"] = console.active_actor;
    start["dynamic_theta"] = cfg.dynamic_theta;
    start["corpus_size"] = corpus.size();
    start["thetas"] = theta_json(console);
    emit(sink, start);

    PipelineResult result;

    // Initial pool: a uniform random subset of size k.
    std::vector<Id> selection;
    {
        Rng rng(derive_seed(cfg.seed, "initial_selection"));
        auto idx = rng.sample_without_replacement(corpus.size(), cfg.select_k);
        std::sort(idx.begin(), idx.end());
        selection.assign(idx.begin(), idx.end());
    }

    int stage = 0;
    for (long t = 1; t <= cfg.total_steps; ++t) {
        if (t % cfg.update_every == 0) {
            ++stage;
            std::map<std::string, double> aggregates;
            std::map<std::string, nlohmann::ordered_json> reward_summaries;

            for (std::size_t i = 0; i < actors.size(); ++i) {
                auto& actor = actors[i];
                const auto sample =
                    actor_sample(actor, corpus, resolvers[i],
                                 cfg.probe_per_subcategory,
                                 derive_seed(cfg.seed, "probe/" + actor.actor_id,
                                             static_cast<std::uint64_t>(stage)));
                const auto ids = sample.all_ids();
                const auto rewards = oracle.rewards(ids);
                const auto report = compute_subcategory_reward(sample, rewards, stage);
                actor = actor_update(actor, report);
                aggregates[actor.actor_id] =
                    actor_aggregate_reward(actor, report, cfg.aggregate_norm);

                nlohmann::ordered_json per_sub = nlohmann::ordered_json::object();
                for (const auto& sub : actor.subcategories) {
                    const auto& entry = report.per_subcategory.at(sub);
                    nlohmann::ordered_json e;
                    e["count"] = entry.sample_count;
                    if (entry.mean_reward) e["mean_reward"] = *entry.mean_reward;
                    per_sub[sub] = e;
                }
                reward_summaries[actor.actor_id] = per_sub;
            }

            if (cfg.dynamic_theta) {
                console_update(console, aggregates, stage);
            } else {
                ConsoleState::StageRecord rec;
                rec.stage = stage;
                rec.aggregates = aggregates;
                KahanSum mean;
                for (const auto& [id, r] : aggregates) mean.add(r);
                rec.mean_aggregate = mean.value() / static_cast<double>(aggregates.size());
                rec.thetas = console.thetas;
                console.history.push_back(std::move(rec));
            }

            if (cfg.policy == SelectionPolicy::top_k) {
                const Vec scores = score_corpus(console, actors, resolvers, corpus);
                std::vector<std::pair<Id, double>> pairs;
                pairs.reserve(scores.size());
                for (std::size_t i = 0; i < scores.size(); ++i)
                    pairs.emplace_back(static_cast<Id>(i), scores[i]);
                selection = select_top_k(pairs, cfg.select_k);
            } else {
                Rng rng(derive_seed(cfg.seed, "random_selection",
                                    static_cast<std::uint64_t>(stage)));
                auto idx = rng.sample_without_replacement(corpus.size(), cfg.select_k);
                std::sort(idx.begin(), idx.end());
                selection.assign(idx.begin(), idx.end());
            }

            StageSummary summary;
            summary.stage = stage;
            summary.step = t;
            summary.thetas =
                std::map<std::string, double>(console.thetas.begin(), console.thetas.end());
            summary.aggregates = aggregates;
            summary.selection_digest = hex64(fnv1a64(std::span<const Id>(selection)));
            for (std::size_t i = 0; i < actors.size(); ++i) {
                std::map<std::string, std::size_t> counts;
                for (Id id : selection)
                    counts[resolvers[i].label_of(corpus.points[id])]++;
                summary.selection_composition[actors[i].actor_id] = std::move(counts);
            }
            result.stages.push_back(summary);

            nlohmann::ordered_json ev;
            ev["type"] = "stage";
            ev["stage"] = stage;
            ev["t"] = t;
            ev["thetas"] = theta_json(console);
            nlohmann::ordered_json agg = nlohmann::ordered_json::object();
            for (const auto& id : console.actor_order) agg[id] = aggregates.at(id);
            ev["aggregates"] = agg;
            nlohmann::ordered_json rs = nlohmann::ordered_json::object();
            for (const auto& id : console.actor_order) rs[id] = reward_summaries.at(id);
            ev["rewards"] = rs;
            ev["selection_digest"] = summary.selection_digest;
            ev["selection_size"] = selection.size();
            nlohmann::ordered_json comp = nlohmann::ordered_json::object();
            for (const auto& id : console.actor_order) {
                nlohmann::ordered_json c = nlohmann::ordered_json::object();
                for (const auto& [sub, count] : summary.selection_composition.at(id))
                    c[sub] = count;
                comp[id] = c;
            }
            ev["selection_composition"] = comp;
            emit(sink, ev);

            if (on_stage) on_stage(stage, actors, console);
        }

        // One optimizer step on a batch from the current pool.
        std::vector<Id> batch(cfg.batch_size);
        {
            Rng rng(derive_seed(cfg.seed, "batch", static_cast<std::uint64_t>(t)));
            for (auto& id : batch) id = selection[rng.below(selection.size())];
        }
        const double loss = oracle.train_loss(batch);
        oracle.train_step(batch, cfg.learning_rate);
        result.steps_run = t;

        nlohmann::ordered_json ev;
        ev["type"] = "step";
        ev["t"] = t;
        ev["train_loss"] = loss;
        ev["batch_digest"] = hex64(fnv1a64(std::span<const Id>(batch)));
        emit(sink, ev);
    }

    result.actors = std::move(actors);
    result.console = std::move(console);
    result.selection = std::move(selection);
    result.final_reference_loss = oracle.reference_loss();

    nlohmann::ordered_json end;
    end["type"] = "run_end";
    end["steps"] = result.steps_run;
    end["stages"] = stage;
    end["final_reference_loss"] = result.final_reference_loss;
    emit(sink, end);
    return result;
}

}  // namespace dsel
