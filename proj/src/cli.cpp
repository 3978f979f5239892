#include "dsel/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "dsel/actors.hpp"
#include "dsel/conflict.hpp"
#include "dsel/console.hpp"
#include "dsel/corpus.hpp"
#include "dsel/initializer.hpp"
#include "dsel/reward.hpp"
#include "dsel/rng.hpp"

namespace dsel::cli {

namespace fs = std::filesystem;

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw config_error(message);
}

void require_file(const std::string& path, const std::string& what) {
    require(!path.empty(), what + " path is required");
    require(fs::exists(path), what + " path does not exist: '" + path + "'");
}

fs::path ensure_dir(const std::string& dir) {
    require(!dir.empty(), "output directory is required (--out)");
    fs::create_directories(dir);
    return fs::path(dir);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw io_error("failed while writing '" + path.string() + "'");
}

std::uint64_t hash_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot hash '" + path.string() + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    return h;
}

// Manifest of every artifact in the run directory (hash of file bytes).
void write_manifest(const fs::path& dir) {
    std::vector<std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), dir).generic_string();
        if (rel == "manifest.json") continue;
        files.push_back(rel);
    }
    std::sort(files.begin(), files.end());
    nlohmann::ordered_json manifest;
    for (const auto& rel : files) manifest[rel] = hex64(hash_file(dir / rel));
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

InfluenceConfig influence_config(const RunConfig& cfg) {
    InfluenceConfig icfg;
    if (cfg.reward_mode == "exact") icfg.mode = InfluenceConfig::Mode::exact;
    else if (cfg.reward_mode == "projected") icfg.mode = InfluenceConfig::Mode::projected;
    else throw config_error("reward_mode must be exact or projected, got '" +
                            cfg.reward_mode + "'");
    icfg.projection_dim = cfg.projection_dim;
    icfg.projection_seed = cfg.projection_seed;
    icfg.identity_projection = cfg.identity_projection;
    require(cfg.cg_tol > 0.0, "cg_tol must be positive");
    icfg.cg_tolerance = cfg.cg_tol;
    icfg.cg_max_iters = cfg.cg_max_iters;
    if (cfg.damping >= 0.0) icfg.damping = cfg.damping;
    return icfg;
}

RewardModel build_model(const RunConfig& cfg, std::size_t input_dim) {
    const auto kind = model_kind_from_string(cfg.model_kind);
    switch (kind) {
        case ModelKind::linear_regression: return RewardModel::linear(input_dim, cfg.ridge);
        case ModelKind::logistic_regression:
            return RewardModel::logistic(input_dim, cfg.ridge);
        case ModelKind::softmax_classifier:
            return RewardModel::softmax(input_dim, 3, cfg.ridge);
    }
    throw config_error("unreachable model kind");
}

ReferenceTask build_reference(const RunConfig& cfg, const Corpus& corpus) {
    if (!cfg.reference_path.empty()) {
        require_file(cfg.reference_path, "reference task");
        return load_reference_task(cfg.reference_path, cfg.ref_sample,
                                   derive_seed(cfg.seed, "reference_eval"));
    }
    return synthesize_reference_task(corpus, std::max<std::size_t>(cfg.emit_ref, 50),
                                     cfg.ref_noise, cfg.seed);
}

struct ParsedRegime {
    Regime regime = Regime::collaborative;
    std::string active;
};

ParsedRegime parse_regime(const std::string& s) {
    if (s == "collaborative") return {Regime::collaborative, ""};
    if (s == "competitive") return {Regime::competitive, ""};
    if (s.rfind("single:", 0) == 0) {
        ParsedRegime r{Regime::single, s.substr(7)};
        require(!r.active.empty(), "regime single needs an actor id, e.g. single:quality");
        return r;
    }
    throw config_error("regime must be collaborative, competitive or single:<actor>, got '" +
                       s + "'");
}

AggregateNorm parse_n_interp(const std::string& s) {
    if (s == "sampled") return AggregateNorm::sampled_subcategories;
    if (s == "all") return AggregateNorm::all_subcategories;
    throw config_error("n_interp must be sampled or all, got '" + s + "'");
}

std::string proportions_csv(const std::vector<MixtureConfig>& configs,
                            const std::vector<ProxyEvaluation>& evals,
                            const std::vector<std::string>& subcategories) {
    std::ostringstream out;
    out << "config_id";
    for (const auto& s : subcategories) out << ",p_" << s;
    out << ",loss\n";
    for (std::size_t i = 0; i < configs.size(); ++i) {
        out << configs[i].config_id;
        for (double p : configs[i].proportions) out << ',' << fmt_double(p);
        out << ',' << fmt_double(evals[i].validation_loss) << '\n';
    }
    return out.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// label

void cmd_label(const RunConfig& cfg) {
    const fs::path dir = ensure_dir(cfg.output_dir);

    Corpus corpus;
    if (!cfg.raw_path.empty()) {
        require_file(cfg.raw_path, "raw input");
        // Demo labelers for unlabeled feature files: a squashed linear quality
        // score and a hashed topic assignment.
        std::ifstream in(cfg.raw_path, std::ios::binary);
        std::vector<RawPoint> raw;
        std::string line;
        std::size_t line_no = 0;
        std::vector<std::string> domains;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            try {
                auto j = nlohmann::ordered_json::parse(line);
                RawPoint r;
                r.features = j.at("features").get<Vec>();
                r.domain = j.at("domain").get<std::string>();
                r.token_count = j.value("token_count", 1u);
                if (std::find(domains.begin(), domains.end(), r.domain) == domains.end())
                    domains.push_back(r.domain);
                raw.push_back(std::move(r));
            } catch (const nlohmann::json::exception& e) {
                throw io_error(cfg.raw_path + ":" + std::to_string(line_no) +
                               ": invalid raw record: " + e.what());
            }
        }
        require(!raw.empty(), "raw input '" + cfg.raw_path + "' holds no records");
        const auto topics = presets::slimpajama_default(1).topic_labels;
        QualityFn quality = [](const Vec& f) {
            double mean = 0.0;
            for (double v : f) mean += v;
            mean /= static_cast<double>(f.size());
            return 2.5 * (1.0 + std::tanh(mean));
        };
        TopicFn topic = [&topics](const Vec& f) {
            const std::uint64_t h =
                fnv1a64(f.data(), f.size() * sizeof(double));
            return topics[h % topics.size()];
        };
        corpus = label_corpus(raw, domains, topics, quality, topic);
    } else {
        GeneratorSpec spec;
        if (!cfg.generator_path.empty()) {
            require_file(cfg.generator_path, "generator spec");
            std::ifstream in(cfg.generator_path, std::ios::binary);
            try {
                spec = GeneratorSpec::from_json(nlohmann::ordered_json::parse(in));
            } catch (const nlohmann::json::exception& e) {
                throw config_error("invalid generator spec '" + cfg.generator_path +
                                   "': " + e.what());
            }
        } else {
            spec = presets::by_name(cfg.preset, cfg.points > 0 ? cfg.points : 20000);
        }
        if (cfg.points > 0) spec.n_points = cfg.points;
        corpus = generate_synthetic_corpus(spec, cfg.seed);
    }

    const fs::path points_path = dir / "corpus.jsonl";
    save_corpus(corpus, points_path.string(), (dir / "corpus.header.json").string());

    if (cfg.emit_ref > 0 && corpus.metadata.contains("true_weights")) {
        const auto ref = synthesize_reference_task(corpus, cfg.emit_ref, cfg.ref_noise,
                                                   cfg.seed);
        save_reference_task(ref, (dir / "reference.jsonl").string());
    }

    // Per-actor subcategory summary.
    std::ostringstream summary;
    for (const auto& attribute : {"domain", "quality", "topic"}) {
        const auto resolver = make_resolver(attribute, corpus);
        const auto groups = group_by_subcategory(corpus, resolver);
        summary << attribute << ":\n";
        for (const auto& [sub, ids] : groups) {
            const double share =
                100.0 * static_cast<double>(ids.size()) / static_cast<double>(corpus.size());
            char line[160];
            std::snprintf(line, sizeof(line), "  %-20s %8zu  %6.2f%%\n", sub.c_str(),
                          ids.size(), share);
            summary << line;
        }
    }
    std::cout << "labeled " << corpus.size() << " points into '" << dir.string() << "'\n"
              << summary.str();
    write_manifest(dir);
}

// ---------------------------------------------------------------------------
// run

namespace {

std::vector<ActorMemory> initialize_actors(const RunConfig& cfg, const Corpus& corpus,
                                           const std::vector<LabelResolver>& resolvers,
                                           const fs::path& dir) {
    std::vector<ActorMemory> actors;
    actors.reserve(resolvers.size());
    for (const auto& r : resolvers)
        actors.push_back(make_actor(r.attribute, r, cfg.actor_eta, 0.5));

    if (cfg.init == "uniform") return actors;

    if (cfg.init.rfind("dir:", 0) == 0) {
        const fs::path src(cfg.init.substr(4));
        for (auto& a : actors) {
            const fs::path p = src / (a.actor_id + ".json");
            require_file(p.string(), "actor memory");
            ActorMemory loaded = load_actor(p.string());
            require(loaded.actor_id == a.actor_id && loaded.subcategories == a.subcategories,
                    "actor memory '" + p.string() + "' does not match the corpus registry");
            loaded.eta = cfg.actor_eta;
            a = std::move(loaded);
        }
        return actors;
    }

    require(cfg.init == "regmix",
            "init must be uniform, regmix or dir:<path>, got '" + cfg.init + "'");

    InitializerParams params;
    params.n_configs = cfg.init_configs;
    params.concentration = cfg.init_concentration;
    params.family = regressor_family_from_string(cfg.init_family);
    params.ridge = cfg.init_ridge;
    params.n_candidates = cfg.init_candidates;
    params.seed = derive_seed(cfg.seed, "initializer");

    const fs::path init_dir = dir / "init";
    fs::create_directories(init_dir);

    for (std::size_t i = 0; i < actors.size(); ++i) {
        auto& actor = actors[i];
        if (actor.actor_id == "quality") {
            // Quality starts from the fixed monotone ramp, not a mixture fit.
            MixtureConfig ramp{actor.actor_id,
                               Vec(actor.subcategories.size(),
                                   1.0 / static_cast<double>(actor.subcategories.size())),
                               0};
            actor = initialize_actor_weights(ramp, actor);
            save_actor(actor, (init_dir / (actor.actor_id + ".json")).string());
            continue;
        }
        const auto groups = group_by_subcategory(corpus, resolvers[i]);
        Vec natural(groups.size(), 0.0);
        for (std::size_t g = 0; g < groups.size(); ++g)
            natural[g] = static_cast<double>(groups[g].second.size()) /
                         static_cast<double>(corpus.size());
        const auto outcome = run_initializer(
            actor, natural, alignment_surface(corpus, actor.actor_id), "closed-form", params);
        actor = outcome.actor;
        write_text(init_dir / (actor.actor_id + "_configs.csv"),
                   proportions_csv(outcome.configs, outcome.evaluations,
                                   actor.subcategories));
        save_actor(actor, (init_dir / (actor.actor_id + ".json")).string());
        std::cout << "initializer[" << actor.actor_id
                  << "]: held-out R2 = " << fmt_double(outcome.regressor.held_out_r2) << "\n";
    }
    return actors;
}

}  // namespace

void cmd_run(const RunConfig& cfg) {
    require_file(cfg.corpus_path, "corpus");
    const fs::path dir = ensure_dir(cfg.output_dir);

    const Corpus corpus =
        load_corpus(cfg.corpus_path, header_path_for(cfg.corpus_path));
    require(corpus.feature_dim >= 2, "corpus features cannot carry a training target");

    std::vector<LabelResolver> resolvers = {make_resolver("quality", corpus),
                                            make_resolver("domain", corpus),
                                            make_resolver("topic", corpus)};
    std::vector<ActorMemory> actors = initialize_actors(cfg, corpus, resolvers, dir);

    const auto parsed = parse_regime(cfg.regime);
    std::vector<std::string> ids;
    for (const auto& a : actors) ids.push_back(a.actor_id);
    ConsoleState console =
        make_console_state(ids, cfg.console_eta, parsed.regime, parsed.active);

    RewardOracle oracle(build_model(cfg, corpus.feature_dim - 1), corpus,
                        build_reference(cfg, corpus), influence_config(cfg));

    PipelineConfig pcfg;
    pcfg.total_steps = cfg.T;
    pcfg.update_every = cfg.U;
    pcfg.select_k = cfg.k;
    pcfg.batch_size = cfg.batch_size;
    pcfg.probe_per_subcategory = cfg.m;
    pcfg.learning_rate = cfg.learning_rate;
    pcfg.seed = cfg.seed;
    pcfg.policy = cfg.policy == "random" ? SelectionPolicy::random : SelectionPolicy::top_k;
    if (cfg.policy != "random" && cfg.policy != "topk")
        throw config_error("policy must be topk or random, got '" + cfg.policy + "'");
    pcfg.aggregate_norm = parse_n_interp(cfg.n_interp);
    pcfg.dynamic_theta = cfg.dynamic_theta;

    const fs::path actors_dir = dir / "actors";
    auto snapshot = [&](int stage, std::span<const ActorMemory> current,
                        const ConsoleState& state) {
        char stage_name[32];
        std::snprintf(stage_name, sizeof(stage_name), "stage_%04d", stage);
        const fs::path stage_dir = actors_dir / stage_name;
        fs::create_directories(stage_dir);
        for (const auto& a : current) save_actor(a, (stage_dir / (a.actor_id + ".json")).string());
        nlohmann::ordered_json cj;
        cj["eta"] = state.eta;
        cj["regime"] = to_string(state.regime);
        nlohmann::ordered_json tj = nlohmann::ordered_json::object();
        for (const auto& id : state.actor_order) tj[id] = state.thetas.at(id);
        cj["thetas"] = tj;
        write_text(stage_dir / "console.json", cj.dump(2) + "\n");
    };
    snapshot(0, actors, console);

    FileSink sink((dir / "event_log.jsonl").string());
    PipelineResult result;
    try {
        result = run_pipeline(corpus, std::move(actors), resolvers, std::move(console), oracle,
                              pcfg, &sink, snapshot);
    } catch (...) {
        // The write-through sink has already flushed everything up to the
        // failing stage; keep it and surface the error.
        write_manifest(dir);
        throw;
    }

    // Stage-level trajectory of collaborative weights and aggregates.
    {
        std::ostringstream csv;
        csv << "stage,t,actor,theta,aggregate_reward\n";
        for (const auto& s : result.stages)
            for (const auto& id : result.console.actor_order)
                csv << s.stage << ',' << s.step << ',' << id << ','
                    << fmt_double(s.thetas.at(id)) << ','
                    << fmt_double(s.aggregates.at(id)) << '\n';
        write_text(dir / "theta_trajectory.csv", csv.str());
    }
    {
        std::ostringstream csv;
        csv << "stage,actor,subcategory,count,share\n";
        for (const auto& s : result.stages)
            for (const auto& id : result.console.actor_order)
                for (const auto& [sub, count] : s.selection_composition.at(id))
                    csv << s.stage << ',' << id << ',' << sub << ',' << count << ','
                        << fmt_double(static_cast<double>(count) /
                                      static_cast<double>(pcfg.select_k))
                        << '\n';
        write_text(dir / "selection_composition.csv", csv.str());
    }
    write_text(dir / "model_final.json", oracle.model().to_json().dump(2) + "\n");
    write_manifest(dir);

    std::cout << "run complete: " << result.steps_run << " steps, " << result.stages.size()
              << " selection stages, final reference loss "
              << fmt_double(result.final_reference_loss) << "\n";
}

// ---------------------------------------------------------------------------
// analyze

void cmd_analyze(const RunConfig& cfg) {
    require_file(cfg.corpus_path, "corpus");
    require_file(cfg.model_path, "model snapshot");
    const fs::path dir = ensure_dir(cfg.output_dir);

    const Corpus corpus =
        load_corpus(cfg.corpus_path, header_path_for(cfg.corpus_path));
    std::ifstream min(cfg.model_path, std::ios::binary);
    RewardModel model = [&] {
        try {
            return RewardModel::from_json(nlohmann::ordered_json::parse(min));
        } catch (const nlohmann::json::exception& e) {
            throw io_error("invalid model snapshot '" + cfg.model_path + "': " + e.what());
        }
    }();
    require(model.input_dim() + 1 == corpus.feature_dim,
            "model input dimension does not match the corpus feature layout");

    RewardOracle oracle(std::move(model), corpus, build_reference(cfg, corpus),
                        influence_config(cfg));
    const ConflictReport report = build_conflict_report(corpus, oracle, cfg.stage);

    write_text(dir / "conflict_report.csv", report.to_csv());
    write_text(dir / "conflict_report.json", report.to_json().dump(2) + "\n");

    // Per-point reward dump for downstream analysis.
    {
        std::vector<Id> all_ids(corpus.size());
        for (std::size_t i = 0; i < all_ids.size(); ++i) all_ids[i] = static_cast<Id>(i);
        const auto rewards = oracle.rewards(all_ids);
        std::ostringstream csv;
        csv << "id,reward,mode,stage\n";
        for (Id id : all_ids)
            csv << id << ',' << fmt_double(rewards.at(id)) << ',' << cfg.reward_mode << ','
                << cfg.stage << '\n';
        write_text(dir / "rewards.csv", csv.str());
    }
    write_manifest(dir);

    std::size_t populated = 0;
    for (const auto& c : report.cells)
        if (c.count > 0) ++populated;
    std::cout << "conflict report: " << report.cells.size() << " cells (" << populated
              << " populated) -> '" << (dir / "conflict_report.csv").string() << "'\n";
}

// ---------------------------------------------------------------------------
// argument handling

int run(const std::vector<std::string>& args) {
    RunConfig cfg;

    // A config file supplies defaults; explicit flags override below.
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--config") {
            try {
                load_config_file(cfg, args[i + 1]);
            } catch (const config_error& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 2;
            }
        }
    }

    CLI::App app{"multi-actor pretraining data selection"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "flat key=value config file");

    auto add_reward_options = [&](CLI::App* cmd) {
        cmd->add_option("--ref", cfg.reference_path, "reference task JSONL");
        cmd->add_option("--ref-sample", cfg.ref_sample, "reference subsample size");
        cmd->add_option("--reward-mode", cfg.reward_mode, "exact | projected");
        cmd->add_option("--projection-dim", cfg.projection_dim, "sketch dimension");
        cmd->add_option("--projection-seed", cfg.projection_seed, "sketch seed");
        cmd->add_flag("--identity-projection", cfg.identity_projection,
                      "use the identity sketch (requires dim == parameters)");
        cmd->add_option("--cg-tol", cfg.cg_tol, "CG relative residual tolerance");
        cmd->add_option("--cg-max-iters", cfg.cg_max_iters, "CG iteration cap (0 = auto)");
        cmd->add_option("--damping", cfg.damping, "Hessian damping (negative = auto)");
        cmd->add_option("--model-kind", cfg.model_kind,
                        "linear-regression | logistic-regression | softmax-classifier");
        cmd->add_option("--ridge", cfg.ridge, "model ridge coefficient");
        cmd->add_option("--ref-noise", cfg.ref_noise, "synthesized reference noise");
        cmd->add_option("--seed", cfg.seed, "run seed");
    };

    CLI::App* label = app.add_subcommand("label", "generate or label a corpus");
    label->add_option("--out", cfg.output_dir, "output directory");
    label->add_option("--preset", cfg.preset,
                      "generator preset: slimpajama | planted-domain | conflict-grid");
    label->add_option("--gen", cfg.generator_path, "generator spec JSON");
    label->add_option("--raw", cfg.raw_path, "unlabeled raw JSONL to label");
    label->add_option("--points", cfg.points, "corpus size");
    label->add_option("--seed", cfg.seed, "generator seed");
    label->add_option("--emit-ref", cfg.emit_ref,
                      "reference examples to synthesize (0 = none)");
    label->add_option("--ref-noise", cfg.ref_noise, "reference target noise");

    CLI::App* runc = app.add_subcommand("run", "execute the selection pipeline");
    runc->add_option("--corpus", cfg.corpus_path, "labeled corpus JSONL");
    runc->add_option("--out", cfg.output_dir, "run directory");
    runc->add_option("--T", cfg.T, "total training steps");
    runc->add_option("--U", cfg.U, "steps between selection stages");
    runc->add_option("--k", cfg.k, "selected subset size");
    runc->add_option("--batch-size", cfg.batch_size, "training batch size");
    runc->add_option("--m", cfg.m, "probe samples per subcategory");
    runc->add_option("--actor-eta", cfg.actor_eta, "actor sliding factor");
    runc->add_option("--console-eta", cfg.console_eta, "console learning rate");
    runc->add_option("--regime", cfg.regime,
                     "collaborative | competitive | single:<actor>");
    runc->add_option("--policy", cfg.policy, "topk | random");
    runc->add_option("--n-interp", cfg.n_interp,
                     "aggregate divisor: sampled | all subcategories");
    runc->add_flag("!--fixed-theta", cfg.dynamic_theta,
                   "freeze collaborative weights at their initial values");
    runc->add_option("--lr", cfg.learning_rate, "optimizer learning rate");
    runc->add_option("--init", cfg.init, "uniform | regmix | dir:<path>");
    runc->add_option("--init-configs", cfg.init_configs, "mixture configurations");
    runc->add_option("--init-family", cfg.init_family, "linear | quadratic-ridge");
    runc->add_option("--init-concentration", cfg.init_concentration,
                     "Dirichlet concentration around natural proportions");
    runc->add_option("--init-candidates", cfg.init_candidates, "search candidates");
    runc->add_option("--init-ridge", cfg.init_ridge, "regressor ridge");
    add_reward_options(runc);

    CLI::App* analyze = app.add_subcommand("analyze", "conflict report for a snapshot");
    analyze->add_option("--corpus", cfg.corpus_path, "labeled corpus JSONL");
    analyze->add_option("--model", cfg.model_path, "model snapshot JSON");
    analyze->add_option("--out", cfg.output_dir, "output directory");
    analyze->add_option("--stage", cfg.stage, "stage index recorded in the report");
    add_reward_options(analyze);

    std::vector<std::string> cli_args(args.begin(), args.end());
    std::reverse(cli_args.begin(), cli_args.end());  // CLI11 wants reversed args
    try {
        app.parse(cli_args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (label->parsed()) cmd_label(cfg);
        if (runc->parsed()) cmd_run(cfg);
        if (analyze->parsed()) cmd_analyze(cfg);
        return 0;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace dsel::cli
