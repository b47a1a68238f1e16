#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "narramap/analysis.hpp"
#include "support.hpp"

using namespace narramap;

namespace {

AnalyzedArticle art(const std::string& id, int cluster, const ActantialModel& model,
                    const std::string& source = "harborpost",
                    std::optional<Date> date = Date{2024, 1, 8}) {
    AnalyzedArticle a;
    a.id = id;
    a.source = source;
    a.published_at = date;
    a.model = model;
    a.cluster = cluster;
    return a;
}

}  // namespace

TEST_CASE("label_clusters picks modal actors over the threshold and groups codes") {
    // 10-article cluster, hand-set frequencies:
    //   Subject: "Israel" x6, "Hamas" x3, missing x1          -> 60% Israel
    //   Sender:  "Israel" x4 (one as "israel"), "Qatar" x2    -> 40% Israel (normalized)
    //   Object:  "Gaza" x2                                    -> exactly 20%, kept
    //   Receiver:"Gaza" x1                                    -> 10%, below threshold
    //   Helper/Opponent: nothing above threshold
    std::vector<AnalyzedArticle> articles;
    auto add = [&](const std::string& su, const std::string& ob, const std::string& se,
                   const std::string& re) {
        articles.push_back(art("a" + std::to_string(articles.size()), 0,
                               support::model_of(su, ob, se, re, "", "")));
    };
    add("Israel", "Gaza", "Israel", "Gaza");
    add("Israel", "Gaza", "israel", "");
    add("Israel", "", "Israel", "");
    add("Israel", "", "Israel", "");
    add("Israel", "", "Qatar", "");
    add("Israel", "", "Qatar", "");
    add("Hamas", "", "", "");
    add("Hamas", "", "", "");
    add("Hamas", "", "", "");
    add("", "", "", "");

    const auto specs = label_clusters(articles, 0.20);
    REQUIRE(specs.size() == 1);
    const auto& spec = specs[0];
    CHECK(spec.cluster_id == 0);
    // Subject 60% Israel, Sender 40% Israel -> one entry "Israel (SuSe)";
    // Object exactly 20% Gaza -> "Gaza (Ob)"
    REQUIRE(spec.entries.size() == 2);
    CHECK(spec.entries[0].actor == "Israel");
    CHECK(spec.entries[0].codes == "SuSe");
    CHECK(spec.entries[1].actor == "Gaza");
    CHECK(spec.entries[1].codes == "Ob");
    CHECK(spec.label == "Israel (SuSe), Gaza (Ob)");
}

TEST_CASE("label_clusters is invariant under case changes of the actors") {
    std::vector<AnalyzedArticle> articles;
    for (int i = 0; i < 4; ++i)
        articles.push_back(art("a" + std::to_string(i), 0,
                               support::model_of(i % 2 ? "ARCADIA" : "arcadia", "", "", "", "", "")));
    const auto specs = label_clusters(articles, 0.20);
    REQUIRE(specs.size() == 1);
    REQUIRE(specs[0].entries.size() == 1);
    CHECK(specs[0].entries[0].codes == "Su");
    // displayed surface is an observed raw form (most frequent; tie -> lexicographic)
    CHECK(specs[0].entries[0].actor == "ARCADIA");
}

TEST_CASE("clusters with nothing over the threshold get an empty label") {
    std::vector<AnalyzedArticle> articles;
    for (int i = 0; i < 6; ++i)
        articles.push_back(art("a" + std::to_string(i), 0,
                               support::model_of("actor-" + std::to_string(i), "", "", "", "", "")));
    const auto specs = label_clusters(articles, 0.20);
    REQUIRE(specs.size() == 1);
    CHECK(specs[0].entries.empty());
    CHECK(specs[0].label.empty());
}

TEST_CASE("actor_table applies the 5% floor and the top-3 cap") {
    std::vector<AnalyzedArticle> articles;
    // cluster of 4: one subject in 100% of articles
    for (int i = 0; i < 4; ++i)
        articles.push_back(art("c" + std::to_string(i), 0, support::model_of("Solo", "", "", "", "", "")));
    const auto rows4 = actor_table(articles, 0.05, 3);
    REQUIRE(rows4.size() == 1);
    CHECK(rows4[0].actor == "Solo");
    CHECK(rows4[0].share == doctest::Approx(1.0));

    SUBCASE("share below 5% is excluded (1 of 21 = 4.76%)") {
        std::vector<AnalyzedArticle> many;
        for (int i = 0; i < 20; ++i)
            many.push_back(art("m" + std::to_string(i), 0, support::model_of("Common", "", "", "", "", "")));
        many.push_back(art("m20", 0, support::model_of("Rare", "", "", "", "", "")));
        const auto rows = actor_table(many, 0.05, 3);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].actor == "Common");
    }

    SUBCASE("share of exactly 5% is included (1 of 20)") {
        std::vector<AnalyzedArticle> many;
        for (int i = 0; i < 19; ++i)
            many.push_back(art("m" + std::to_string(i), 0, support::model_of("Common", "", "", "", "", "")));
        many.push_back(art("m19", 0, support::model_of("Rare", "", "", "", "", "")));
        const auto rows = actor_table(many, 0.05, 3);
        REQUIRE(rows.size() == 2);
        CHECK(rows[1].actor == "Rare");
        CHECK(rows[1].share == doctest::Approx(0.05));
    }

    SUBCASE("at most three rows per cluster and role, matching brute-force counts") {
        std::vector<AnalyzedArticle> mixed;
        const std::vector<std::string> subjects = {"A", "A", "A", "B", "B", "C", "C", "D"};
        for (std::size_t i = 0; i < subjects.size(); ++i)
            mixed.push_back(art("x" + std::to_string(i), 0,
                                support::model_of(subjects[i], "", "", "", "", "")));
        const auto rows = actor_table(mixed, 0.05, 3);
        REQUIRE(rows.size() == 3);  // D (12.5%) trimmed by the top-3 cap
        CHECK(rows[0].actor == "A");
        CHECK(rows[0].share == doctest::Approx(3.0 / 8.0));
        CHECK(rows[1].actor == "B");
        CHECK(rows[2].actor == "C");  // tie with D broken lexicographically
    }
}

TEST_CASE("syncretism_report matches hand counts") {
    // 6 articles, 3 with Subject-Sender syncretism -> share 0.5
    std::vector<AnalyzedArticle> articles;
    articles.push_back(art("s0", 0, support::model_of("Arcadia", "x", "Arcadia", "y", "", "")));
    articles.push_back(art("s1", 0, support::model_of("Arcadia", "x", "arcadia ", "y", "", "")));
    articles.push_back(art("s2", 0, support::model_of("Borealis", "x", "Borealis", "y", "", "")));
    articles.push_back(art("s3", 0, support::model_of("Borealis", "x", "Harbor", "y", "", "")));
    articles.push_back(art("s4", 0, support::model_of("Cascade", "x", "Delta", "y", "", "")));
    articles.push_back(art("s5", 0, support::model_of("", "x", "Echo", "y", "", "")));

    const auto rows = syncretism_report(articles);
    REQUIRE(rows.size() == 15);
    CHECK(rows[0].pair == make_role_pair(ActantRole::Subject, ActantRole::Sender));
    CHECK(rows[0].count == 3);
    CHECK(rows[0].share == doctest::Approx(0.5));
    REQUIRE_FALSE(rows[0].top_actors.empty());
    CHECK(rows[0].top_actors[0].actor == "Arcadia");
    CHECK(rows[0].top_actors[0].share_within_pair == doctest::Approx(2.0 / 3.0));

    SUBCASE("no repeated primaries -> all shares zero") {
        std::vector<AnalyzedArticle> distinct;
        distinct.push_back(art("d0", 0, support::model_of("a", "b", "c", "d", "e", "f")));
        distinct.push_back(art("d1", 0, support::model_of("g", "h", "i", "j", "k", "l")));
        for (const auto& row : syncretism_report(distinct)) {
            CHECK(row.count == 0);
            CHECK(row.share == 0.0);
        }
    }

    SUBCASE("strengthening normalization to case-sensitive never raises a share") {
        for (const auto& row : syncretism_report(articles)) {
            std::size_t case_sensitive = 0;
            for (const auto& a : articles) {
                const auto pa = a.model.primary(row.pair.a);
                const auto pb = a.model.primary(row.pair.b);
                if (pa && pb && *pa == *pb) ++case_sensitive;
            }
            CHECK(case_sensitive <= row.count);
        }
    }
}

TEST_CASE("missing_actant_stats counts per role and per cluster") {
    std::vector<AnalyzedArticle> articles;
    articles.push_back(art("a", 0, support::model_of("s", "o", "se", "r", "h", "op")));
    articles.push_back(art("b", 0, support::model_of("s", "o", "se", "r", "", "op")));
    articles.push_back(art("c", 1, support::model_of("s", "o", "se", "r", "h", "op")));
    articles.push_back(art("d", 1, support::model_of("s", "o", "se", "r", "h", "op")));

    const auto stats = missing_actant_stats(articles);
    CHECK(stats.overall[4] == doctest::Approx(0.25));  // Helper missing in 1 of 4
    CHECK(stats.overall[5] == doctest::Approx(0.0));
    CHECK(stats.per_cluster.at(0)[4] == doctest::Approx(0.5));
    CHECK(stats.per_cluster.at(1)[4] == doctest::Approx(0.0));

    SUBCASE("all-complete corpus gives zeros") {
        std::vector<AnalyzedArticle> complete = {articles[0], articles[2]};
        const auto s = missing_actant_stats(complete);
        for (double share : s.overall) CHECK(share == 0.0);
    }
}

TEST_CASE("source_shares sum to one per cluster") {
    std::vector<AnalyzedArticle> articles;
    articles.push_back(art("a", 0, {}, "harborpost"));
    articles.push_back(art("b", 0, {}, "harborpost"));
    articles.push_back(art("c", 0, {}, "meridianwire"));
    articles.push_back(art("d", 1, {}, "meridianwire"));

    const auto rows = source_shares(articles);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].shares.at("harborpost") == doctest::Approx(2.0 / 3.0));
    CHECK(rows[0].shares.at("meridianwire") == doctest::Approx(1.0 / 3.0));
    CHECK(rows[1].shares.at("meridianwire") == doctest::Approx(1.0));
    CHECK(rows[1].shares.count("harborpost") == 0);
    for (const auto& row : rows) {
        double sum = 0;
        for (const auto& [source, share] : row.shares) sum += share;
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("component_timeline over a full partition reproduces weekly counts") {
    std::vector<AnalyzedArticle> articles;
    articles.push_back(art("a", 0, {}, "s1", Date{2024, 1, 1}));
    articles.push_back(art("b", 0, {}, "s2", Date{2024, 1, 2}));
    articles.push_back(art("c", 1, {}, "s1", Date{2024, 1, 10}));
    articles.push_back(art("d", 2, {}, "s1", Date{2024, 2, 5}));

    const std::map<std::string, std::set<int>> all_components = {{"everything", {0, 1, 2}}};
    const auto series = component_timeline(articles, all_components, true);
    REQUIRE(series.size() == 1);

    Corpus corpus;
    for (const auto& a : articles) {
        Article article;
        article.id = a.id;
        article.source = a.source;
        article.body = "x";
        article.published_at = a.published_at;
        corpus.articles.push_back(article);
    }
    CHECK(series.at("everything") == weekly_counts(corpus, true));

    SUBCASE("split components sum to the total") {
        const std::map<std::string, std::set<int>> split = {{"one", {0}}, {"two", {1, 2}}};
        const auto parts = component_timeline(articles, split, false);
        std::size_t total = 0;
        for (const auto& [name, weeks] : parts)
            for (const auto& [key, count] : weeks) total += count;
        CHECK(total == articles.size());
    }

    SUBCASE("empty component yields an empty series") {
        const auto parts = component_timeline(articles, {{"none", {9}}}, false);
        CHECK(parts.at("none").empty());
    }

    SUBCASE("overlapping components are rejected") {
        CHECK_THROWS_AS(component_timeline(articles, {{"x", {0, 1}}, {"y", {1}}}, false),
                        std::invalid_argument);
    }
}

TEST_CASE("whole-text baseline on all-identical documents degenerates for both pipelines") {
    support::TempDir tmp("baseline");
    FileCache cache(tmp.path() / "cache");
    HashEmbeddingsBackend backend(32, 0);

    std::vector<Article> storage(10);
    std::vector<const Article*> articles;
    for (std::size_t i = 0; i < storage.size(); ++i) {
        storage[i].id = "a" + std::to_string(i);
        storage[i].source = "s";
        storage[i].body = "identical body text for every article";
        articles.push_back(&storage[i]);
    }
    const std::vector<int> narrative_labels(10, 0);  // degenerate upstream too

    UmapParams params;
    params.n_neighbors = 3;
    params.n_epochs = 50;
    params.seed = 1;
    const BaselineResult result = baseline_whole_text(
        articles, narrative_labels, backend, cache, {}, params, 2, 5, {{0, 1}});
    CHECK(result.model.k == 2);  // k_min: silhouette flat at zero everywhere
    CHECK(result.pairs.size() == 1);
}
