#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsel/common.hpp"

namespace dsel {

/// One pre-featurized document. The feature vector stands in for the raw
/// content; by convention its last component carries the document's own
/// supervision target for the stand-in training model.
struct DataPoint {
    Id id = 0;
    Vec features;
    std::string domain;
    double quality_score = 0.0;
    int quality_interval = 1;
    std::string topic;
    std::uint32_t token_count = 1;
};

/// Maps a [0,5] quality score onto intervals 1..5; the top interval is closed
/// so 4.0 and 5.0 both land in 5. Scores outside [0,5] raise data_error.
int map_quality_interval(double score);

struct Corpus {
    std::vector<DataPoint> points;
    std::vector<std::string> domain_labels;
    std::vector<std::string> topic_labels;
    std::size_t feature_dim = 0;
    nlohmann::ordered_json metadata;

    std::size_t size() const { return points.size(); }

    // Throws data_error if ids are not dense 0..N-1, a label is unregistered,
    // or a feature vector has the wrong dimension.
    void validate() const;
};

/// Extracts the subcategory label an actor keys on. Built-ins cover quality,
/// domain and topic; additional attributes can be registered for new actors.
struct LabelResolver {
    std::string attribute;
    std::function<std::string(const DataPoint&)> label_of;
    std::vector<std::string> subcategories;
};

LabelResolver make_resolver(const std::string& attribute, const Corpus& corpus);

/// Groups point ids by subcategory, in the resolver's subcategory order.
/// Every point lands in exactly one group.
std::vector<std::pair<std::string, std::vector<Id>>> group_by_subcategory(
    const Corpus& corpus, const LabelResolver& resolver);

// ---------------------------------------------------------------------------
// Offline labeling

struct RawPoint {
    Vec features;
    std::string domain;
    std::uint32_t token_count = 1;
};

using QualityFn = std::function<double(const Vec&)>;
using TopicFn = std::function<std::string(const Vec&)>;

/// Labels raw (features, domain) records with the supplied scorer and topic
/// classifier. Deterministic given the functions; quality scores outside
/// [0,5] and unregistered topic labels are rejected.
Corpus label_corpus(const std::vector<RawPoint>& raw,
                    std::vector<std::string> domain_labels,
                    std::vector<std::string> topic_labels,
                    const QualityFn& quality_fn, const TopicFn& topic_fn);

// ---------------------------------------------------------------------------
// Synthetic generation

/// Declarative recipe for a synthetic corpus with planted structure. The
/// "alignment" of a point scales how consistent its embedded target is with
/// the true weight vector used to build reference tasks: 1 means the target
/// follows the true weights exactly (plus noise), 0 means pure noise, and
/// negative values plant actively misleading targets.
///
/// Alignment can optionally be split into feature blocks, each with its own
/// per-attribute coefficients; a point's target is then the sum of the block
/// coefficients times the block inner products with the true weights. The
/// subcategories driving a large block dominate early training while those
/// driving a small block matter later, which plants a reward structure whose
/// per-attribute importance shifts across training stages.
struct GeneratorSpec {
    struct BlockSpec {
        std::size_t dims = 0;
        double base = 1.0;
        std::map<std::string, double> domain_offsets;
        std::map<int, double> interval_offsets;
        std::map<std::string, double> topic_offsets;
    };

    std::size_t n_points = 10000;
    std::size_t feature_inputs = 16;   // embedded target adds one more slot
    double target_noise = 0.1;
    std::uint32_t min_tokens = 64;
    std::uint32_t max_tokens = 2048;

    std::vector<std::string> domain_labels;
    Vec domain_proportions;            // must sum to 1 within 1e-9

    std::vector<std::string> topic_labels;
    Vec default_topic_distribution;    // defaults to uniform when empty

    Vec default_interval_distribution; // over intervals 1..5; uniform when empty
    std::map<std::string, Vec> interval_distribution_by_domain;

    // Topic mixes for specific (domain, interval) cells.
    struct CellTopics {
        std::string domain;
        int interval = 1;
        Vec distribution;
    };
    std::vector<CellTopics> cell_topic_overrides;

    double alignment_base = 1.0;
    std::map<std::string, double> domain_alignment;
    std::map<int, double> interval_alignment;
    std::map<std::string, double> topic_alignment;
    struct CellAlignment {
        std::string domain;
        int interval = 1;
        double offset = 0.0;
    };
    std::vector<CellAlignment> cell_alignment_overrides;

    // When nonempty, replaces the scalar alignment fields above; block dims
    // must sum to feature_inputs.
    std::vector<BlockSpec> blocks;

    Vec true_weights;                  // drawn from the seed when empty
    double true_weight_scale = 1.0;    // applied to seed-drawn true weights

    nlohmann::ordered_json to_json() const;
    static GeneratorSpec from_json(const nlohmann::ordered_json& j);
};

/// Draws a corpus realizing the spec's mixture proportions. All planted
/// parameters (true weights, alignments, generator seed) are recorded in
/// corpus.metadata so verification can check recovery without exposing them
/// to the selection machinery.
Corpus generate_synthetic_corpus(const GeneratorSpec& spec, std::uint64_t seed);

double planted_alignment(const GeneratorSpec& spec, const std::string& domain,
                         int interval, const std::string& topic);

/// Per-block coefficients for a label combination; scalar recipes yield a
/// single full-width block. planted_alignment reduces these to a width-
/// weighted mean.
Vec planted_block_coefficients(const GeneratorSpec& spec, const std::string& domain,
                               int interval, const std::string& topic);

// Preset recipes used by the CLI and the verification corpora.
namespace presets {

// SlimPajama-like mixture: seven domains at the published proportions,
// thirteen topics, neutral rewards.
GeneratorSpec slimpajama_default(std::size_t n_points);

// One domain carries all of the usable signal; mild quality and topic ramps
// differentiate points inside it.
GeneratorSpec planted_domain(std::size_t n_points);

// A full (domain x interval) grid with four planted conflict cells:
// high-quality/low-influence, high-quality/low-diversity,
// high-diversity/low-influence and high-diversity/low-quality.
GeneratorSpec conflict_grid(std::size_t n_points);

struct ConflictCells {
    std::pair<std::string, int> high_quality_low_influence;
    std::pair<std::string, int> high_quality_low_diversity;
    std::pair<std::string, int> high_diversity_low_influence;
    std::pair<std::string, int> high_diversity_low_quality;
};
ConflictCells conflict_cells();

GeneratorSpec by_name(const std::string& name, std::size_t n_points);

}  // namespace presets

// ---------------------------------------------------------------------------
// Persistence: JSON-lines points file plus a sidecar header with the label
// registries, feature dimension and generator metadata. Key order is fixed
// so reruns produce identical bytes.

void save_corpus(const Corpus& corpus, const std::string& points_path,
                 const std::string& header_path);
Corpus load_corpus(const std::string& points_path, const std::string& header_path);

// Conventional sidecar path: corpus.jsonl -> corpus.header.json
std::string header_path_for(const std::string& points_path);

}  // namespace dsel
