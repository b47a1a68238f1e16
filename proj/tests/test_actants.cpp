#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "narramap/actants.hpp"
#include "narramap/prompt.hpp"
#include "support.hpp"

using namespace narramap;

TEST_CASE("canonical role order and codes are fixed") {
    REQUIRE(kRoleOrder.size() == 6);
    CHECK(kRoleOrder[0] == ActantRole::Subject);
    CHECK(kRoleOrder[1] == ActantRole::Object);
    CHECK(kRoleOrder[2] == ActantRole::Sender);
    CHECK(kRoleOrder[3] == ActantRole::Receiver);
    CHECK(kRoleOrder[4] == ActantRole::Helper);
    CHECK(kRoleOrder[5] == ActantRole::Opponent);

    std::set<std::string> codes;
    for (ActantRole r : kRoleOrder) codes.insert(role_code(r));
    CHECK(codes.size() == 6);  // unique
    CHECK(std::string(role_code(ActantRole::Subject)) == "Su");
    CHECK(std::string(role_code(ActantRole::Opponent)) == "Op");
}

TEST_CASE("every role participates in at least one relation axis") {
    std::set<ActantRole> covered;
    for (RelationAxis axis : {RelationAxis::Desire, RelationAxis::Communication, RelationAxis::Power})
        for (ActantRole r : axis_roles(axis)) covered.insert(r);
    CHECK(covered.size() == 6);
}

TEST_CASE("actor normalization trims and collapses whitespace") {
    CHECK(normalize_actor_surface("  Northern   League ") == "Northern League");
    CHECK(normalize_actor_surface("\tIsrael\n") == "Israel");
    CHECK(normalize_actor_key("  The  AUTHOR ") == "the author");
}

TEST_CASE("render_prompt substitutes the article body verbatim") {
    const std::string prompt = render_prompt("X attacked Y.");
    CHECK(prompt.find("Article: X attacked Y.") != std::string::npos);
    CHECK(prompt.find(R"({"Actant Label": ["Actant Name"]})") != std::string::npos);
    CHECK(prompt.find("{{ article }}") == std::string::npos);

    SUBCASE("two bodies differ only in the article segment") {
        const std::string p1 = render_prompt("AAA");
        const std::string p2 = render_prompt("BB");
        const std::size_t pos1 = p1.find("AAA");
        const std::size_t pos2 = p2.find("BB");
        REQUIRE(pos1 == pos2);
        CHECK(p1.substr(0, pos1) == p2.substr(0, pos2));
        CHECK(p1.substr(pos1 + 3) == p2.substr(pos2 + 2));
    }

    SUBCASE("empty body is invalid input") {
        CHECK_THROWS_AS(render_prompt(""), std::invalid_argument);
    }
}

TEST_CASE("detect_syncretisms pairs roles sharing a primary actor") {
    SUBCASE("worked example: Subject and Sender share Israel") {
        const auto model = support::model_of("Israel", "Gaza", "Israel", "Gaza", "United States",
                                             "Hamas");
        const auto pairs = detect_syncretisms(model);
        REQUIRE(pairs.size() == 2);
        CHECK(pairs.count(make_role_pair(ActantRole::Subject, ActantRole::Sender)) == 1);
        CHECK(pairs.count(make_role_pair(ActantRole::Object, ActantRole::Receiver)) == 1);
    }

    SUBCASE("comparison is normalized") {
        auto model = support::model_of("israel", "g", "Israel ", "r", "h", "o");
        const auto pairs = detect_syncretisms(model);
        REQUIRE(pairs.size() == 1);
        CHECK(pairs.count(make_role_pair(ActantRole::Subject, ActantRole::Sender)) == 1);
    }

    SUBCASE("all distinct primaries give the empty set") {
        CHECK(detect_syncretisms(support::model_of("a", "b", "c", "d", "e", "f")).empty());
    }

    SUBCASE("missing roles never pair") {
        CHECK(detect_syncretisms(support::model_of("", "", "", "", "", "")).empty());
    }

    SUBCASE("case changes leave the result invariant") {
        const auto base = support::model_of("Alpha", "beta", "ALPHA", "Beta", "", "");
        auto upper = base;
        for (auto& actors : upper.actors)
            for (auto& a : actors)
                for (auto& c : a) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        CHECK(detect_syncretisms(base) == detect_syncretisms(upper));
    }
}

TEST_CASE("all_role_pairs enumerates C(6,2)=15 unordered pairs") {
    const auto pairs = all_role_pairs();
    CHECK(pairs.size() == 15);
    for (const auto& p : pairs) CHECK(static_cast<int>(p.a) < static_cast<int>(p.b));
}

TEST_CASE("primary is the first actor, absent when the list is empty") {
    ActantialModel model;
    model.actors_for(ActantRole::Subject) = {"First", "Second"};
    CHECK(model.primary(ActantRole::Subject) == "First");
    CHECK_FALSE(model.primary(ActantRole::Helper).has_value());
    CHECK(model.missing(ActantRole::Helper));
}
