#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "dsel/corpus.hpp"
#include "dsel/rng.hpp"
#include "oracles.hpp"

using namespace dsel;
namespace tu = dsel::testutil;

TEST_CASE("quality intervals follow the five-bin map with a closed top") {
    CHECK(map_quality_interval(0.0) == 1);
    CHECK(map_quality_interval(3.999) == 4);
    CHECK(map_quality_interval(4.0) == 5);
    CHECK(map_quality_interval(5.0) == 5);
    // Interior boundaries are half-open.
    CHECK(map_quality_interval(1.0) == 2);
    CHECK(map_quality_interval(2.9999999) == 3);
}

TEST_CASE("quality scores outside [0,5] are rejected by value") {
    CHECK_THROWS_WITH_AS(map_quality_interval(-0.1), doctest::Contains("-0.1"), data_error);
    CHECK_THROWS_WITH_AS(map_quality_interval(5.1), doctest::Contains("5.1"), data_error);
    CHECK_THROWS_AS(map_quality_interval(std::nan("")), data_error);
}

TEST_CASE("quality interval is monotone nondecreasing in the score") {
    Rng rng(17);
    Vec scores(500);
    for (auto& s : scores) s = 5.0 * rng.uniform();
    std::sort(scores.begin(), scores.end());
    int prev = 1;
    for (double s : scores) {
        const int j = map_quality_interval(s);
        CHECK(j >= prev);
        CHECK(j >= 1);
        CHECK(j <= 5);
        prev = j;
    }
}

namespace {

std::vector<RawPoint> make_raw(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<RawPoint> raw;
    const std::vector<std::string> domains = {"web", "code"};
    for (std::size_t i = 0; i < n; ++i) {
        RawPoint r;
        r.features = {rng.uniform(), rng.uniform(), rng.uniform()};
        r.domain = domains[rng.below(domains.size())];
        r.token_count = 100;
        raw.push_back(std::move(r));
    }
    return raw;
}

const std::vector<std::string> kTestTopics = {"alpha", "beta", "gamma"};

TopicFn first_feature_topic() {
    return [](const Vec& f) { return kTestTopics[f[0] > 0.5 ? 1 : 0]; };
}

}  // namespace

TEST_CASE("labeling is deterministic: same input twice gives identical files") {
    const auto raw = make_raw(200, 5);
    QualityFn q = [](const Vec& f) { return 5.0 * f[1]; };
    const auto a = label_corpus(raw, {"web", "code"}, kTestTopics, q, first_feature_topic());
    const auto b = label_corpus(raw, {"web", "code"}, kTestTopics, q, first_feature_topic());

    const auto dir = tu::fresh_dir("label_det");
    save_corpus(a, (dir / "a.jsonl").string(), (dir / "a.header.json").string());
    save_corpus(b, (dir / "b.jsonl").string(), (dir / "b.header.json").string());
    CHECK(tu::slurp(dir / "a.jsonl") == tu::slurp(dir / "b.jsonl"));
}

TEST_CASE("a constant quality function puts every point in interval 3") {
    const auto raw = make_raw(50, 6);
    const auto corpus = label_corpus(raw, {"web", "code"}, kTestTopics,
                                     [](const Vec&) { return 2.5; }, first_feature_topic());
    for (const auto& p : corpus.points) CHECK(p.quality_interval == 3);
}

TEST_CASE("a linear quality function reproduces the histogram the test plants") {
    // Oracle side: the test derives the expected interval per point from the
    // raw features before labeling runs.
    const auto raw = make_raw(500, 7);
    QualityFn q = [](const Vec& f) { return 5.0 * f[1]; };
    std::map<int, std::size_t> expected;
    for (const auto& r : raw) expected[map_quality_interval(5.0 * r.features[1])]++;

    const auto corpus = label_corpus(raw, {"web", "code"}, kTestTopics, q,
                                     first_feature_topic());
    std::map<int, std::size_t> got;
    for (const auto& p : corpus.points) got[p.quality_interval]++;
    CHECK(got == expected);
}

TEST_CASE("labeling errors: bad quality range and unregistered topics") {
    const auto raw = make_raw(10, 8);
    CHECK_THROWS_AS(label_corpus(raw, {"web", "code"}, kTestTopics,
                                 [](const Vec&) { return 5.5; }, first_feature_topic()),
                    data_error);
    CHECK_THROWS_WITH_AS(
        label_corpus(raw, {"web", "code"}, kTestTopics, [](const Vec&) { return 1.0; },
                     [](const Vec&) { return std::string("unknown-topic"); }),
        doctest::Contains("unknown-topic"), data_error);
}

TEST_CASE("generator rejects mixtures that do not sum to one") {
    GeneratorSpec spec = presets::slimpajama_default(100);
    spec.domain_proportions[0] += 1e-6;
    CHECK_THROWS_AS(generate_synthetic_corpus(spec, 1), config_error);
}

TEST_CASE("generation is deterministic under a fixed seed") {
    const auto spec = presets::planted_domain(500);
    const auto a = generate_synthetic_corpus(spec, 99);
    const auto b = generate_synthetic_corpus(spec, 99);
    REQUIRE(a.size() == b.size());
    const auto dir = tu::fresh_dir("gen_det");
    save_corpus(a, (dir / "a.jsonl").string(), (dir / "a.header.json").string());
    save_corpus(b, (dir / "b.jsonl").string(), (dir / "b.header.json").string());
    CHECK(tu::slurp(dir / "a.jsonl") == tu::slurp(dir / "b.jsonl"));
    CHECK(tu::slurp(dir / "a.header.json") == tu::slurp(dir / "b.header.json"));
}

TEST_CASE("two-domain counts stay within the binomial three-sigma band") {
    GeneratorSpec spec;
    spec.n_points = 10000;
    spec.feature_inputs = 4;
    spec.domain_labels = {"left", "right"};
    spec.domain_proportions = {0.5, 0.5};
    spec.topic_labels = kTestTopics;
    const auto corpus = generate_synthetic_corpus(spec, 1234);

    std::size_t left = 0;
    for (const auto& p : corpus.points)
        if (p.domain == "left") ++left;
    const double n = static_cast<double>(spec.n_points);
    const double expected = 0.5 * n;
    const double sigma = std::sqrt(n * 0.5 * 0.5);  // binomial bound, oracle side
    CHECK(std::abs(static_cast<double>(left) - expected) <= 3.0 * sigma);
}

TEST_CASE("the slimpajama preset realizes the published domain weights") {
    const auto spec = presets::slimpajama_default(50000);
    const Vec expected = {0.5220, 0.2670, 0.0520, 0.0420, 0.0460, 0.0380, 0.0330};
    const auto corpus = generate_synthetic_corpus(spec, 2024);
    std::map<std::string, std::size_t> counts;
    for (const auto& p : corpus.points) counts[p.domain]++;
    for (std::size_t d = 0; d < spec.domain_labels.size(); ++d) {
        const double share = static_cast<double>(counts[spec.domain_labels[d]]) /
                             static_cast<double>(corpus.size());
        CHECK(std::abs(share - expected[d]) < 0.01);
    }
}

TEST_CASE("corpus round-trips losslessly through jsonl plus header") {
    const auto corpus = generate_synthetic_corpus(presets::conflict_grid(400), 55);
    const auto dir = tu::fresh_dir("roundtrip");
    const auto points = (dir / "c.jsonl").string();
    const auto header = (dir / "c.header.json").string();
    save_corpus(corpus, points, header);
    const auto loaded = load_corpus(points, header);

    REQUIRE(loaded.size() == corpus.size());
    CHECK(loaded.domain_labels == corpus.domain_labels);
    CHECK(loaded.topic_labels == corpus.topic_labels);
    CHECK(loaded.feature_dim == corpus.feature_dim);
    CHECK(loaded.metadata == corpus.metadata);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& a = corpus.points[i];
        const auto& b = loaded.points[i];
        CHECK(a.id == b.id);
        CHECK(a.features == b.features);
        CHECK(a.domain == b.domain);
        CHECK(a.quality_score == b.quality_score);
        CHECK(a.quality_interval == b.quality_interval);
        CHECK(a.topic == b.topic);
        CHECK(a.token_count == b.token_count);
    }

    // Saving the reloaded corpus reproduces the bytes.
    const auto points2 = (dir / "c2.jsonl").string();
    save_corpus(loaded, points2, (dir / "c2.header.json").string());
    CHECK(tu::slurp(points) == tu::slurp(points2));
}

TEST_CASE("every actor's subcategory partition covers the corpus exactly once") {
    const auto corpus = generate_synthetic_corpus(presets::planted_domain(800), 77);
    for (const auto& attribute : {"quality", "domain", "topic"}) {
        const auto resolver = make_resolver(attribute, corpus);
        const auto groups = group_by_subcategory(corpus, resolver);
        std::size_t total = 0;
        std::set<Id> seen;
        for (const auto& [sub, ids] : groups) {
            total += ids.size();
            seen.insert(ids.begin(), ids.end());
        }
        CHECK(total == corpus.size());
        CHECK(seen.size() == corpus.size());
    }
}

TEST_CASE("corpus validation catches broken invariants") {
    auto corpus = generate_synthetic_corpus(presets::planted_domain(50), 3);
    SUBCASE("non-dense ids") {
        corpus.points[10].id = 99;
        CHECK_THROWS_AS(corpus.validate(), data_error);
    }
    SUBCASE("unregistered domain") {
        corpus.points[0].domain = "nowhere";
        CHECK_THROWS_AS(corpus.validate(), data_error);
    }
    SUBCASE("wrong feature dimension") {
        corpus.points[0].features.push_back(0.0);
        CHECK_THROWS_AS(corpus.validate(), data_error);
    }
    SUBCASE("interval inconsistent with score") {
        corpus.points[0].quality_score = 0.1;
        corpus.points[0].quality_interval = 5;
        CHECK_THROWS_AS(corpus.validate(), data_error);
    }
}

TEST_CASE("generator spec round-trips through json") {
    const auto spec = presets::conflict_grid(1234);
    const auto j = spec.to_json();
    const auto back = GeneratorSpec::from_json(j);
    CHECK(back.to_json() == j);
    CHECK(back.n_points == spec.n_points);
    CHECK(back.cell_topic_overrides.size() == spec.cell_topic_overrides.size());
}
