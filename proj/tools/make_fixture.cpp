// Regenerates the bundled offline fixture under fixtures/news60/: a 60-article
// synthetic corpus, canned chat responses for the stub backend, and a ready
// config. Four narratives with fixed actor casts; one of them (the editorial
// block) carries no Helper/Opponent at all. Run from the repository root:
//   ./build/make_fixture [fixtures/news60]

#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct NarrativeSpec {
    std::string name;
    std::size_t count;
    // Subject, Object, Sender, Receiver, Helper, Opponent ("" = missing)
    std::array<std::string, 6> actors;
    // every 4th article swaps one role's surface form
    int variant_role = -1;
    std::string variant_actor;
    // harborpost articles out of each 8
    int harborpost_per_8 = 4;
    std::string body_template;  // {su}/{ob}/{op} plus {i} for uniqueness
};

std::string fill(std::string text, const std::string& key, const std::string& value) {
    const std::string tag = "{" + key + "}";
    std::size_t pos;
    while ((pos = text.find(tag)) != std::string::npos) text.replace(pos, tag.size(), value);
    return text;
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path root = (argc > 1) ? argv[1] : "fixtures/news60";
    fs::create_directories(root / "responses");

    const std::vector<NarrativeSpec> narratives = {
        {"riverside", 16,
         {"Arcadia", "the river delta", "Arcadia", "Borealis", "the Northern League", "Borealis"},
         0, "the Arcadian government", 5,
         "{su} pressed its claim over {ob} on day {i}, moving patrol barges downstream while "
         "{op} lodged a formal protest. Observers from the Northern League described the accord "
         "talks as fragile but alive, and river traffic slowed near the delta locks."},
        {"sealanes", 16,
         {"Borealis", "the sea lanes", "the Harbor Front", "Arcadia", "the Red Banner", "Arcadia"},
         5, "the Arcadian navy", 2,
         "{su} tightened convoy rules across {ob} on day {i} after the Harbor Front circulated a "
         "new tariff memo aimed at {op}. Dockworkers in Borealis read the Red Banner bulletin "
         "aloud, and insurers repriced every route that touches the straits."},
        {"assembly", 16,
         {"President Mara Voss", "the unity accord", "President Mara Voss", "the assembly",
          "the Civic Union", "Senator Theo Rand"},
         0, "Mara Voss", 6,
         "{su} urged the assembly to ratify {ob} on day {i}, trading procedural concessions with "
         "{op} late into the night. Civic Union volunteers filled the gallery and the floor vote "
         "on the accord slipped by another week."},
        {"editorial", 12,
         {"the editorial board", "the ceasefire", "the editorial board", "the reader", "", ""},
         1, "a lasting ceasefire", 4,
         "In a short unsigned column on day {i}, {su} asks what {ob} would actually require of "
         "its signatories, and leaves the reader with more questions than answers."}};

    // interleave the narratives so article order never encodes the grouping
    std::vector<std::pair<std::size_t, std::size_t>> order;  // (narrative, index within)
    {
        std::array<std::size_t, 4> emitted{};
        bool more = true;
        while (more) {
            more = false;
            for (std::size_t n = 0; n < narratives.size(); ++n) {
                if (emitted[n] < narratives[n].count) {
                    order.push_back({n, emitted[n]++});
                    more = true;
                }
            }
        }
    }

    std::ofstream corpus(root / "corpus.jsonl", std::ios::binary | std::ios::trunc);
    static const char* kRoleNames[6] = {"Subject", "Object", "Sender",
                                        "Receiver", "Helper", "Opponent"};

    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const auto [n, idx] = order[pos];
        const NarrativeSpec& spec = narratives[n];
        const std::string id = spec.name + "-" + std::to_string(idx);

        std::array<std::string, 6> actors = spec.actors;
        if (spec.variant_role >= 0 && idx % 4 == 3) actors[spec.variant_role] = spec.variant_actor;

        // dates cycle over 12 ISO weeks starting Monday 2024-01-01
        const int week = static_cast<int>(pos % 12);
        const int day_of_year = week * 7 + static_cast<int>(pos % 5);  // Jan 1 + offset
        const int month = (day_of_year < 31) ? 1 : (day_of_year < 60 ? 2 : 3);
        const int day = day_of_year - (month == 1 ? 0 : (month == 2 ? 31 : 60)) + 1;
        char date[16];
        std::snprintf(date, sizeof(date), "2024-%02d-%02d", month, day);

        json article;
        article["id"] = id;
        article["source"] = (static_cast<int>(idx) % 8 < spec.harborpost_per_8) ? "harborpost"
                                                                                : "meridianwire";
        article["title"] = spec.name + " dispatch " + std::to_string(idx);
        std::string body = fill(spec.body_template, "su", actors[0]);
        body = fill(body, "ob", actors[1]);
        body = fill(body, "op", actors[5].empty() ? "no one in particular" : actors[5]);
        body = fill(body, "i", std::to_string(pos));
        article["body"] = body;
        article["published_at"] = date;
        article["url"] = "https://example.test/" + id;
        corpus << article.dump() << "\n";

        // canned chat response: keys in the prompt's label-set order, with a
        // little shape variety for the parser (fences, bare strings, second
        // actors)
        json answer;
        for (const int role : {2, 3, 0, 1, 4, 5}) {  // Sender, Receiver, Subject, Object, ...
            if (actors[role].empty()) {
                answer[kRoleNames[role]] = json::array();
            } else if (pos % 11 == 5 && role == 0) {
                answer[kRoleNames[role]] = actors[role];  // bare string, not array
            } else if (pos % 9 == 2 && role == 0) {
                answer[kRoleNames[role]] = json::array({actors[role], "local observers"});
            } else {
                answer[kRoleNames[role]] = json::array({actors[role]});
            }
        }
        std::string response = answer.dump(2);
        if (pos % 7 == 3) response = "```json\n" + response + "\n```";
        else if (pos % 7 == 5) response = "The actants are:\n" + response;
        std::ofstream rsp(root / "responses" / (id + ".json"), std::ios::binary | std::ios::trunc);
        rsp << response << "\n";
    }
    corpus.close();

    json config;
    config["corpus"] = "corpus.jsonl";
    config["keywords"] = {"Arcadia", "Borealis", "accord", "ceasefire"};
    config["chat"] = {{"mode", "stub"}, {"stub_dir", "responses"}, {"model", "stub-llm-v1"},
                      {"concurrency", 4}};
    config["embedder"] = {{"mode", "hash"}, {"dim", 64}, {"batch_size", 16}};
    config["svd"] = {{"dim", 8}, {"fit_scope", "per_role"}};
    config["umap"] = {{"n_neighbors", 10}, {"min_dist", 0.1}, {"n_components", 2},
                      {"n_epochs", 300}, {"metric", "euclidean"}};
    config["cluster"] = {{"k_min", 2}, {"k_max", 12}};
    config["report"] = {{"label_threshold", 0.20}, {"table_min_share", 0.05},
                        {"table_top_actors", 3},
                        {"components", {{"border", {0, 1}}, {"domestic", {2, 3}}}}};
    config["baseline"] = {{"pairs", {{0, 1}}}};
    config["out"] = "out";
    config["cache"] = "cache";
    config["seed"] = 7;
    std::ofstream cfg(root / "config.json", std::ios::binary | std::ios::trunc);
    cfg << config.dump(2) << "\n";

    std::cout << "fixture written to " << root.string() << "\n";
    return 0;
}
