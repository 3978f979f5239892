#include "dsel/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dsel/rng.hpp"

namespace dsel {

int map_quality_interval(double score) {
    if (!(score >= 0.0 && score <= 5.0)) {
        std::ostringstream msg;
        msg << "quality score " << score << " outside [0,5]";
        throw data_error(msg.str());
    }
    int j = static_cast<int>(std::floor(score)) + 1;
    return j > 5 ? 5 : j;
}

void Corpus::validate() const {
    auto registered = [](const std::vector<std::string>& labels, const std::string& l) {
        return std::find(labels.begin(), labels.end(), l) != labels.end();
    };
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (p.id != static_cast<Id>(i))
            throw data_error("corpus ids are not dense: expected " + std::to_string(i) +
                             ", found " + std::to_string(p.id));
        if (p.features.size() != feature_dim)
            throw data_error("point " + std::to_string(p.id) + " has feature dimension " +
                             std::to_string(p.features.size()) + ", corpus declares " +
                             std::to_string(feature_dim));
        if (!registered(domain_labels, p.domain))
            throw data_error("point " + std::to_string(p.id) + " has unregistered domain '" +
                             p.domain + "'");
        if (!registered(topic_labels, p.topic))
            throw data_error("point " + std::to_string(p.id) + " has unregistered topic '" +
                             p.topic + "'");
        if (p.quality_interval != map_quality_interval(p.quality_score))
            throw data_error("point " + std::to_string(p.id) +
                             " has inconsistent quality interval");
        if (p.token_count == 0)
            throw data_error("point " + std::to_string(p.id) + " has zero token count");
    }
}

LabelResolver make_resolver(const std::string& attribute, const Corpus& corpus) {
    LabelResolver r;
    r.attribute = attribute;
    if (attribute == "quality") {
        r.label_of = [](const DataPoint& p) { return std::to_string(p.quality_interval); };
        r.subcategories = {"1", "2", "3", "4", "5"};
    } else if (attribute == "domain") {
        r.label_of = [](const DataPoint& p) { return p.domain; };
        r.subcategories = corpus.domain_labels;
    } else if (attribute == "topic") {
        r.label_of = [](const DataPoint& p) { return p.topic; };
        r.subcategories = corpus.topic_labels;
    } else {
        throw config_error("unknown actor attribute '" + attribute + "'");
    }
    return r;
}

std::vector<std::pair<std::string, std::vector<Id>>> group_by_subcategory(
    const Corpus& corpus, const LabelResolver& resolver) {
    std::vector<std::pair<std::string, std::vector<Id>>> groups;
    std::map<std::string, std::size_t> index;
    groups.reserve(resolver.subcategories.size());
    for (const auto& sub : resolver.subcategories) {
        index.emplace(sub, groups.size());
        groups.emplace_back(sub, std::vector<Id>{});
    }
    for (const auto& p : corpus.points) {
        const std::string label = resolver.label_of(p);
        auto it = index.find(label);
        if (it == index.end())
            throw data_error("point " + std::to_string(p.id) + " has label '" + label +
                             "' outside the registered subcategories of '" +
                             resolver.attribute + "'");
        groups[it->second].second.push_back(p.id);
    }
    return groups;
}

Corpus label_corpus(const std::vector<RawPoint>& raw,
                    std::vector<std::string> domain_labels,
                    std::vector<std::string> topic_labels,
                    const QualityFn& quality_fn, const TopicFn& topic_fn) {
    Corpus corpus;
    corpus.domain_labels = std::move(domain_labels);
    corpus.topic_labels = std::move(topic_labels);
    corpus.feature_dim = raw.empty() ? 0 : raw.front().features.size();
    corpus.points.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto& r = raw[i];
        DataPoint p;
        p.id = static_cast<Id>(i);
        p.features = r.features;
        p.domain = r.domain;
        p.token_count = r.token_count;
        const double q = quality_fn(r.features);
        if (!(q >= 0.0 && q <= 5.0)) {
            std::ostringstream msg;
            msg << "quality_fn returned " << q << " for point " << i << ", outside [0,5]";
            throw data_error(msg.str());
        }
        p.quality_score = q;
        p.quality_interval = map_quality_interval(q);
        p.topic = topic_fn(r.features);
        const auto& topics = corpus.topic_labels;
        if (std::find(topics.begin(), topics.end(), p.topic) == topics.end())
            throw data_error("topic_fn returned unregistered label '" + p.topic +
                             "' for point " + std::to_string(i));
        corpus.points.push_back(std::move(p));
    }
    corpus.metadata = nlohmann::ordered_json{{"source", "label_corpus"}};
    corpus.validate();
    return corpus;
}

// ---------------------------------------------------------------------------
// Generator

namespace {

void check_distribution(const Vec& dist, std::size_t expected, const std::string& what) {
    if (dist.size() != expected)
        throw config_error(what + " has " + std::to_string(dist.size()) +
                           " entries, expected " + std::to_string(expected));
    double sum = 0.0;
    for (double v : dist) {
        if (v < 0.0) throw config_error(what + " contains a negative proportion");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw config_error(what + " proportions sum to " + fmt_double(sum) +
                           ", expected 1 within 1e-9");
}

std::size_t draw_discrete(Rng& rng, const Vec& dist) {
    const double u = rng.uniform();
    double cdf = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        cdf += dist[i];
        if (u < cdf) return i;
    }
    return dist.size() - 1;
}

Vec uniform_distribution(std::size_t n) {
    return Vec(n, 1.0 / static_cast<double>(n));
}

nlohmann::ordered_json map_to_json(const std::map<std::string, double>& m) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m) j[k] = v;
    return j;
}

nlohmann::ordered_json imap_to_json(const std::map<int, double>& m) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m) j[std::to_string(k)] = v;
    return j;
}

}  // namespace

nlohmann::ordered_json GeneratorSpec::to_json() const {
    nlohmann::ordered_json j;
    j["n_points"] = n_points;
    j["feature_inputs"] = feature_inputs;
    j["target_noise"] = target_noise;
    j["min_tokens"] = min_tokens;
    j["max_tokens"] = max_tokens;
    j["domain_labels"] = domain_labels;
    j["domain_proportions"] = domain_proportions;
    j["topic_labels"] = topic_labels;
    j["default_topic_distribution"] = default_topic_distribution;
    j["default_interval_distribution"] = default_interval_distribution;
    j["interval_distribution_by_domain"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : interval_distribution_by_domain)
        j["interval_distribution_by_domain"][k] = v;
    j["cell_topic_overrides"] = nlohmann::ordered_json::array();
    for (const auto& c : cell_topic_overrides)
        j["cell_topic_overrides"].push_back(
            {{"domain", c.domain}, {"interval", c.interval}, {"distribution", c.distribution}});
    j["alignment_base"] = alignment_base;
    j["domain_alignment"] = map_to_json(domain_alignment);
    j["interval_alignment"] = imap_to_json(interval_alignment);
    j["topic_alignment"] = map_to_json(topic_alignment);
    j["cell_alignment_overrides"] = nlohmann::ordered_json::array();
    for (const auto& c : cell_alignment_overrides)
        j["cell_alignment_overrides"].push_back(
            {{"domain", c.domain}, {"interval", c.interval}, {"offset", c.offset}});
    j["true_weight_scale"] = true_weight_scale;
    j["blocks"] = nlohmann::ordered_json::array();
    for (const auto& b : blocks) {
        nlohmann::ordered_json bj;
        bj["dims"] = b.dims;
        bj["base"] = b.base;
        bj["domain_offsets"] = map_to_json(b.domain_offsets);
        bj["interval_offsets"] = imap_to_json(b.interval_offsets);
        bj["topic_offsets"] = map_to_json(b.topic_offsets);
        j["blocks"].push_back(bj);
    }
    j["true_weights"] = true_weights;
    return j;
}

GeneratorSpec GeneratorSpec::from_json(const nlohmann::ordered_json& j) {
    GeneratorSpec s;
    try {
        s.n_points = j.at("n_points").get<std::size_t>();
        s.feature_inputs = j.value("feature_inputs", std::size_t{16});
        s.target_noise = j.value("target_noise", 0.1);
        s.min_tokens = j.value("min_tokens", 64u);
        s.max_tokens = j.value("max_tokens", 2048u);
        s.domain_labels = j.at("domain_labels").get<std::vector<std::string>>();
        s.domain_proportions = j.at("domain_proportions").get<Vec>();
        s.topic_labels = j.at("topic_labels").get<std::vector<std::string>>();
        if (j.contains("default_topic_distribution"))
            s.default_topic_distribution = j["default_topic_distribution"].get<Vec>();
        if (j.contains("default_interval_distribution"))
            s.default_interval_distribution = j["default_interval_distribution"].get<Vec>();
        if (j.contains("interval_distribution_by_domain"))
            for (const auto& [k, v] : j["interval_distribution_by_domain"].items())
                s.interval_distribution_by_domain[k] = v.get<Vec>();
        if (j.contains("cell_topic_overrides"))
            for (const auto& c : j["cell_topic_overrides"])
                s.cell_topic_overrides.push_back({c.at("domain").get<std::string>(),
                                                  c.at("interval").get<int>(),
                                                  c.at("distribution").get<Vec>()});
        s.alignment_base = j.value("alignment_base", 1.0);
        if (j.contains("domain_alignment"))
            for (const auto& [k, v] : j["domain_alignment"].items())
                s.domain_alignment[k] = v.get<double>();
        if (j.contains("interval_alignment"))
            for (const auto& [k, v] : j["interval_alignment"].items())
                s.interval_alignment[std::stoi(k)] = v.get<double>();
        if (j.contains("topic_alignment"))
            for (const auto& [k, v] : j["topic_alignment"].items())
                s.topic_alignment[k] = v.get<double>();
        if (j.contains("cell_alignment_overrides"))
            for (const auto& c : j["cell_alignment_overrides"])
                s.cell_alignment_overrides.push_back({c.at("domain").get<std::string>(),
                                                      c.at("interval").get<int>(),
                                                      c.at("offset").get<double>()});
        s.true_weight_scale = j.value("true_weight_scale", 1.0);
        if (j.contains("blocks"))
            for (const auto& bj : j["blocks"]) {
                GeneratorSpec::BlockSpec b;
                b.dims = bj.at("dims").get<std::size_t>();
                b.base = bj.value("base", 1.0);
                if (bj.contains("domain_offsets"))
                    for (const auto& [k, v] : bj["domain_offsets"].items())
                        b.domain_offsets[k] = v.get<double>();
                if (bj.contains("interval_offsets"))
                    for (const auto& [k, v] : bj["interval_offsets"].items())
                        b.interval_offsets[std::stoi(k)] = v.get<double>();
                if (bj.contains("topic_offsets"))
                    for (const auto& [k, v] : bj["topic_offsets"].items())
                        b.topic_offsets[k] = v.get<double>();
                s.blocks.push_back(std::move(b));
            }
        if (j.contains("true_weights")) s.true_weights = j["true_weights"].get<Vec>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("invalid generator spec: ") + e.what());
    }
    return s;
}

Vec planted_block_coefficients(const GeneratorSpec& spec, const std::string& domain,
                               int interval, const std::string& topic) {
    if (spec.blocks.empty()) {
        double a = spec.alignment_base;
        if (auto it = spec.domain_alignment.find(domain); it != spec.domain_alignment.end())
            a += it->second;
        if (auto it = spec.interval_alignment.find(interval);
            it != spec.interval_alignment.end())
            a += it->second;
        if (auto it = spec.topic_alignment.find(topic); it != spec.topic_alignment.end())
            a += it->second;
        for (const auto& c : spec.cell_alignment_overrides)
            if (c.domain == domain && c.interval == interval) a += c.offset;
        return Vec{a};
    }
    Vec out;
    out.reserve(spec.blocks.size());
    for (const auto& block : spec.blocks) {
        double a = block.base;
        if (auto it = block.domain_offsets.find(domain); it != block.domain_offsets.end())
            a += it->second;
        if (auto it = block.interval_offsets.find(interval);
            it != block.interval_offsets.end())
            a += it->second;
        if (auto it = block.topic_offsets.find(topic); it != block.topic_offsets.end())
            a += it->second;
        out.push_back(a);
    }
    return out;
}

double planted_alignment(const GeneratorSpec& spec, const std::string& domain,
                         int interval, const std::string& topic) {
    const Vec coeffs = planted_block_coefficients(spec, domain, interval, topic);
    if (spec.blocks.empty()) return coeffs[0];
    double weighted = 0.0;
    double total = 0.0;
    for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
        weighted += coeffs[b] * static_cast<double>(spec.blocks[b].dims);
        total += static_cast<double>(spec.blocks[b].dims);
    }
    return weighted / total;
}

Corpus generate_synthetic_corpus(const GeneratorSpec& spec, std::uint64_t seed) {
    if (spec.n_points == 0) throw config_error("generator: n_points must be positive");
    if (spec.feature_inputs == 0) throw config_error("generator: feature_inputs must be positive");
    if (spec.domain_labels.empty()) throw config_error("generator: no domain labels");
    if (spec.topic_labels.empty()) throw config_error("generator: no topic labels");
    if (spec.min_tokens == 0 || spec.max_tokens < spec.min_tokens)
        throw config_error("generator: invalid token count range");

    check_distribution(spec.domain_proportions, spec.domain_labels.size(),
                       "domain mixture");
    const Vec topic_default = spec.default_topic_distribution.empty()
                                  ? uniform_distribution(spec.topic_labels.size())
                                  : spec.default_topic_distribution;
    check_distribution(topic_default, spec.topic_labels.size(), "default topic distribution");
    const Vec interval_default = spec.default_interval_distribution.empty()
                                     ? uniform_distribution(5)
                                     : spec.default_interval_distribution;
    check_distribution(interval_default, 5, "default interval distribution");
    for (const auto& [dom, dist] : spec.interval_distribution_by_domain)
        check_distribution(dist, 5, "interval distribution for domain '" + dom + "'");
    for (const auto& c : spec.cell_topic_overrides)
        check_distribution(c.distribution, spec.topic_labels.size(),
                           "topic distribution for cell (" + c.domain + ", " +
                               std::to_string(c.interval) + ")");
    if (!spec.blocks.empty()) {
        std::size_t total = 0;
        for (const auto& b : spec.blocks) total += b.dims;
        if (total != spec.feature_inputs)
            throw config_error("generator: block dims sum to " + std::to_string(total) +
                               ", expected feature_inputs = " +
                               std::to_string(spec.feature_inputs));
    }

    Vec true_weights = spec.true_weights;
    if (true_weights.empty()) {
        Rng wrng(derive_seed(seed, "true_weights"));
        true_weights.resize(spec.feature_inputs);
        for (auto& w : true_weights) w = spec.true_weight_scale * wrng.normal();
    } else if (true_weights.size() != spec.feature_inputs) {
        throw config_error("generator: true_weights length does not match feature_inputs");
    }

    auto cell_topics = [&](const std::string& dom, int interval) -> const Vec& {
        for (const auto& c : spec.cell_topic_overrides)
            if (c.domain == dom && c.interval == interval) return c.distribution;
        return topic_default;
    };
    auto interval_dist = [&](const std::string& dom) -> const Vec& {
        auto it = spec.interval_distribution_by_domain.find(dom);
        return it == spec.interval_distribution_by_domain.end() ? interval_default : it->second;
    };

    Corpus corpus;
    corpus.domain_labels = spec.domain_labels;
    corpus.topic_labels = spec.topic_labels;
    corpus.feature_dim = spec.feature_inputs + 1;
    corpus.points.reserve(spec.n_points);

    Rng rng(derive_seed(seed, "points"));
    std::map<std::string, std::size_t> domain_counts;
    for (std::size_t i = 0; i < spec.n_points; ++i) {
        DataPoint p;
        p.id = static_cast<Id>(i);
        p.domain = spec.domain_labels[draw_discrete(rng, spec.domain_proportions)];
        const int interval =
            static_cast<int>(draw_discrete(rng, interval_dist(p.domain))) + 1;
        // Interval 5 corresponds to the closed top bin; drawing in [4,5) keeps
        // the derived interval consistent with the score.
        p.quality_score = (interval - 1) + rng.uniform();
        p.quality_interval = map_quality_interval(p.quality_score);
        p.topic = spec.topic_labels[draw_discrete(rng, cell_topics(p.domain, interval))];

        p.features.resize(spec.feature_inputs + 1);
        const Vec coeffs =
            planted_block_coefficients(spec, p.domain, p.quality_interval, p.topic);
        double target = 0.0;
        std::size_t block = 0;
        std::size_t block_end = spec.blocks.empty() ? spec.feature_inputs
                                                    : spec.blocks[0].dims;
        for (std::size_t d = 0; d < spec.feature_inputs; ++d) {
            while (d >= block_end) {
                ++block;
                block_end += spec.blocks[block].dims;
            }
            p.features[d] = rng.normal();
            target += coeffs[block] * true_weights[d] * p.features[d];
        }
        p.features[spec.feature_inputs] = target + spec.target_noise * rng.normal();

        p.token_count = spec.min_tokens +
                        static_cast<std::uint32_t>(rng.below(spec.max_tokens - spec.min_tokens + 1));
        domain_counts[p.domain]++;
        corpus.points.push_back(std::move(p));
    }

    corpus.metadata = nlohmann::ordered_json();
    corpus.metadata["generator"] = spec.to_json();
    corpus.metadata["seed"] = seed;
    corpus.metadata["true_weights"] = true_weights;
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    for (const auto& label : spec.domain_labels)
        counts[label] = domain_counts.count(label) ? domain_counts[label] : 0;
    corpus.metadata["realized_domain_counts"] = counts;

    corpus.validate();
    return corpus;
}

// ---------------------------------------------------------------------------
// Presets

namespace presets {

namespace {

const std::vector<std::string> kSlimPajamaDomains = {
    "CommonCrawl", "C4", "GitHub", "Books", "ArXiv", "Wikipedia", "StackExchange"};

const Vec kSlimPajamaProportions = {0.5220, 0.2670, 0.0520, 0.0420,
                                    0.0460, 0.0380, 0.0330};

const std::vector<std::string> kTopics = {
    "Activity",       "Education",  "Entertainment", "Finance",
    "Health",         "Business",   "Infrastructure", "Literature",
    "Nature",         "Others",     "Law",            "Networking",
    "Technology"};

}  // namespace

GeneratorSpec slimpajama_default(std::size_t n_points) {
    GeneratorSpec s;
    s.n_points = n_points;
    s.domain_labels = kSlimPajamaDomains;
    s.domain_proportions = kSlimPajamaProportions;
    s.topic_labels = kTopics;
    // Quality mass concentrated at the low end, as web-scale scorers produce.
    s.default_interval_distribution = {0.35, 0.30, 0.20, 0.10, 0.05};
    s.alignment_base = 1.0;
    return s;
}

GeneratorSpec planted_domain(std::size_t n_points) {
    GeneratorSpec s;
    s.n_points = n_points;
    s.feature_inputs = 16;
    s.domain_labels = kSlimPajamaDomains;
    // Realistic proportions keep the planted domain rare, so per-subcategory
    // probing (not population mass) is what surfaces it.
    s.domain_proportions = kSlimPajamaProportions;
    s.topic_labels = kTopics;
    // Two-block target structure. The wide block responds to the domain (and
    // a little to one topic): Books teaches it at full strength, so it
    // dominates early training and fades once learned. The narrow block
    // responds to the quality interval, inverted: lower-rated intervals teach
    // it more, so a rating-follows-usefulness prior points the wrong way and
    // the usefulness of each attribute shifts across training stages.
    GeneratorSpec::BlockSpec wide;
    wide.dims = 12;
    wide.base = 0.2;
    wide.domain_offsets["Books"] = 0.7;
    wide.topic_offsets["Technology"] = 0.1;
    GeneratorSpec::BlockSpec narrow;
    narrow.dims = 4;
    narrow.base = 0.0;
    for (int j = 1; j <= 5; ++j) narrow.interval_offsets[j] = 0.25 * (5 - j);
    s.blocks = {wide, narrow};
    // Rewards stay small next to the offline priors, as LM-scale influence
    // values are, so a run's selection leans on priors plus the console.
    s.true_weight_scale = 0.05;
    s.target_noise = 0.02;
    return s;
}

ConflictCells conflict_cells() {
    return ConflictCells{
        {"ArXiv", 5},      // rated high, barely moves the model
        {"Books", 5},      // rated high, one topic dominates
        {"C4", 3},         // diverse topics, low model impact
        {"Wikipedia", 1},  // diverse topics, low quality rating
    };
}

GeneratorSpec conflict_grid(std::size_t n_points) {
    GeneratorSpec s;
    s.n_points = n_points;
    s.domain_labels = kSlimPajamaDomains;
    s.domain_proportions = uniform_distribution(kSlimPajamaDomains.size());
    s.topic_labels = kTopics;
    s.alignment_base = 0.5;

    // Default cells get a peaked topic mix (rotating dominant topic) so the
    // planted single-topic and uniform-topic cells sit at the entropy
    // extremes.
    const std::size_t n_topics = kTopics.size();
    std::size_t cell_index = 0;
    for (const auto& dom : s.domain_labels) {
        for (int j = 1; j <= 5; ++j) {
            Vec dist(n_topics, 0.45 / static_cast<double>(n_topics - 1));
            dist[cell_index % n_topics] = 0.55;
            s.cell_topic_overrides.push_back({dom, j, dist});
            ++cell_index;
        }
    }

    const auto cells = conflict_cells();
    auto set_topics = [&](const std::pair<std::string, int>& cell, const Vec& dist) {
        for (auto& c : s.cell_topic_overrides)
            if (c.domain == cell.first && c.interval == cell.second) c.distribution = dist;
    };
    Vec single(n_topics, 0.0);
    single[7] = 1.0;  // Literature
    set_topics(cells.high_quality_low_diversity, single);
    set_topics(cells.high_diversity_low_influence, uniform_distribution(n_topics));
    set_topics(cells.high_diversity_low_quality, uniform_distribution(n_topics));

    s.cell_alignment_overrides.push_back(
        {cells.high_quality_low_influence.first, cells.high_quality_low_influence.second, -1.0});
    s.cell_alignment_overrides.push_back(
        {cells.high_diversity_low_influence.first, cells.high_diversity_low_influence.second,
         -1.0});
    return s;
}

GeneratorSpec by_name(const std::string& name, std::size_t n_points) {
    if (name == "slimpajama") return slimpajama_default(n_points);
    if (name == "planted-domain") return planted_domain(n_points);
    if (name == "conflict-grid") return conflict_grid(n_points);
    throw config_error("unknown generator preset '" + name +
                       "' (expected slimpajama, planted-domain or conflict-grid)");
}

}  // namespace presets

// ---------------------------------------------------------------------------
// Persistence

void save_corpus(const Corpus& corpus, const std::string& points_path,
                 const std::string& header_path) {
    std::ofstream points(points_path, std::ios::binary);
    if (!points) throw io_error("cannot open '" + points_path + "' for writing");
    for (const auto& p : corpus.points) {
        nlohmann::ordered_json j;
        j["id"] = p.id;
        j["features"] = p.features;
        j["domain"] = p.domain;
        j["quality_score"] = p.quality_score;
        j["quality_interval"] = p.quality_interval;
        j["topic"] = p.topic;
        j["token_count"] = p.token_count;
        points << j.dump() << '\n';
    }
    points.flush();
    if (!points) throw io_error("failed while writing '" + points_path + "'");

    nlohmann::ordered_json header;
    header["domain_labels"] = corpus.domain_labels;
    header["topic_labels"] = corpus.topic_labels;
    header["feature_dim"] = corpus.feature_dim;
    header["metadata"] = corpus.metadata;
    std::ofstream hdr(header_path, std::ios::binary);
    if (!hdr) throw io_error("cannot open '" + header_path + "' for writing");
    hdr << header.dump(2) << '\n';
    hdr.flush();
    if (!hdr) throw io_error("failed while writing '" + header_path + "'");
}

Corpus load_corpus(const std::string& points_path, const std::string& header_path) {
    std::ifstream hdr(header_path, std::ios::binary);
    if (!hdr) throw io_error("cannot open corpus header '" + header_path + "'");
    Corpus corpus;
    try {
        auto header = nlohmann::ordered_json::parse(hdr);
        corpus.domain_labels = header.at("domain_labels").get<std::vector<std::string>>();
        corpus.topic_labels = header.at("topic_labels").get<std::vector<std::string>>();
        corpus.feature_dim = header.at("feature_dim").get<std::size_t>();
        corpus.metadata = header.value("metadata", nlohmann::ordered_json());
    } catch (const nlohmann::json::exception& e) {
        throw io_error("invalid corpus header '" + header_path + "': " + e.what());
    }

    std::ifstream points(points_path, std::ios::binary);
    if (!points) throw io_error("cannot open corpus file '" + points_path + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(points, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::ordered_json::parse(line);
            DataPoint p;
            p.id = j.at("id").get<Id>();
            p.features = j.at("features").get<Vec>();
            p.domain = j.at("domain").get<std::string>();
            p.quality_score = j.at("quality_score").get<double>();
            p.quality_interval = j.at("quality_interval").get<int>();
            p.topic = j.at("topic").get<std::string>();
            p.token_count = j.at("token_count").get<std::uint32_t>();
            corpus.points.push_back(std::move(p));
        } catch (const nlohmann::json::exception& e) {
            throw io_error(points_path + ":" + std::to_string(line_no) +
                           ": invalid corpus record: " + e.what());
        }
    }
    corpus.validate();
    return corpus;
}

std::string header_path_for(const std::string& points_path) {
    const std::string suffix = ".jsonl";
    if (points_path.size() > suffix.size() &&
        points_path.compare(points_path.size() - suffix.size(), suffix.size(), suffix) == 0)
        return points_path.substr(0, points_path.size() - suffix.size()) + ".header.json";
    return points_path + ".header.json";
}

}  // namespace dsel
