// narramap: narrative-structured text embedding pipeline.
//
// Composable commands over a JSON config: ingest -> extract -> embed ->
// build -> project -> cluster -> [post] -> report, plus baseline and
// dimstudy. Stage artifacts persist under the output directory so expensive
// extraction/embedding stages never re-run, and every command records its
// inputs and outputs in the run manifest.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "narramap/analysis.hpp"
#include "narramap/cluster.hpp"
#include "narramap/config.hpp"
#include "narramap/corpus.hpp"
#include "narramap/embedder.hpp"
#include "narramap/extraction.hpp"
#include "narramap/narrative.hpp"
#include "narramap/openai_client.hpp"
#include "narramap/pipeline.hpp"
#include "narramap/report_io.hpp"
#include "narramap/sha256.hpp"
#include "narramap/umap.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace narramap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUserError = 1;
constexpr int kExitInternalError = 2;

struct UserError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- run context -------------------------------------------------------------

struct Context {
    RunConfig config;
    fs::path config_dir;
    fs::path out;
    fs::path cache_dir;

    fs::path corpus_file() const { return out / "corpus.normalized.jsonl"; }
    fs::path extraction_file() const { return out / "extraction.jsonl"; }
    fs::path vectors_file() const { return out / "actant_vectors.jsonl"; }
    fs::path matrix_file() const { return out / "narrative.f64"; }
    fs::path matrix_ids_file() const { return out / "narrative.ids.txt"; }
    fs::path matrix_meta_file() const { return out / "narrative.meta.json"; }
    fs::path reducer_file(const std::string& role) const {
        return out / "reducers" / (role + ".json");
    }
    fs::path projection_file() const { return out / "projection.csv"; }
    fs::path assignment_file() const { return out / "assignment.csv"; }
    fs::path score_table_file() const { return out / "silhouette_by_k.csv"; }
    fs::path cluster_meta_file() const { return out / "cluster_meta.json"; }
    fs::path manifest_file() const { return out / "manifest.json"; }
    fs::path reports_dir() const { return out / "reports"; }
    fs::path baseline_dir() const { return out / "baseline"; }
};

fs::path resolve(const fs::path& base, const std::string& path) {
    if (path.empty()) return {};
    fs::path p(path);
    return p.is_absolute() ? p : base / p;
}

std::string hash_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("cannot read " + path.string());
    Sha256 h;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        h.update(buf, static_cast<std::size_t>(in.gcount()));
    const auto digest = h.digest();
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned char b : digest) {
        out.push_back(hex[b >> 4]);
        out.push_back(hex[b & 0xf]);
    }
    return out;
}

void require_artifact(const fs::path& path, const std::string& producing_command) {
    if (!fs::exists(path))
        throw UserError("missing " + path.string() + "; run `narramap " + producing_command +
                        "` first");
}

// --- manifest ---------------------------------------------------------------

class Manifest {
public:
    explicit Manifest(fs::path path) : path_(std::move(path)) {
        std::ifstream in(path_, std::ios::binary);
        if (in) {
            try {
                in >> data_;
            } catch (const json::exception&) {
                data_ = json::object();
            }
        }
        if (!data_.is_object()) data_ = json::object();
        data_["version"] = 1;
    }

    // True when the recorded entry matches the inputs/params and all outputs
    // still carry the recorded hashes: the command may be skipped.
    bool up_to_date(const std::string& command, const json& params,
                    const std::map<std::string, std::string>& input_hashes,
                    const std::vector<fs::path>& outputs) const {
        if (!data_.contains("commands") || !data_["commands"].contains(command)) return false;
        const json& entry = data_["commands"][command];
        if (entry.value("params", json::object()) != params) return false;
        const json inputs(input_hashes);
        if (entry.value("inputs", json::object()) != inputs) return false;
        if (!entry.contains("outputs")) return false;
        for (const auto& out : outputs) {
            const std::string key = out.string();
            if (!entry["outputs"].contains(key)) return false;
            if (!fs::exists(out)) return false;
            if (entry["outputs"][key].get<std::string>() != hash_file(out)) return false;
        }
        return true;
    }

    void record(const std::string& command, const json& params,
                const std::map<std::string, std::string>& input_hashes,
                const std::vector<fs::path>& outputs, std::uint64_t seed) {
        json entry;
        entry["params"] = params;
        entry["inputs"] = json(input_hashes);
        entry["outputs"] = json::object();
        for (const auto& out : outputs) entry["outputs"][out.string()] = hash_file(out);
        data_["seed"] = seed;
        data_["commands"][command] = entry;
        fs::create_directories(path_.parent_path());
        std::ofstream out(path_, std::ios::binary | std::ios::trunc);
        out << data_.dump(2) << "\n";
    }

private:
    fs::path path_;
    json data_;
};

// --- backend builders ---------------------------------------------------------

std::unique_ptr<ChatBackend> make_chat_backend(const Context& ctx) {
    const ChatConfig& chat = ctx.config.chat;
    if (chat.mode == "stub") {
        const fs::path dir = resolve(ctx.config_dir, chat.stub_dir);
        if (!fs::is_directory(dir)) throw UserError("chat stub directory not found: " + dir.string());
        return std::make_unique<StubChatBackend>(dir, chat.model);
    }
    EndpointConfig endpoint;
    endpoint.base_url = chat.base_url;
    endpoint.model = chat.model;
    endpoint.api_token = ctx.config.chat_token();
    endpoint.max_retries = chat.max_retries;
    endpoint.retry_backoff_ms = chat.retry_backoff_ms;
    return std::make_unique<HttpChatBackend>(endpoint);
}

std::unique_ptr<EmbeddingsBackend> make_embeddings_backend(const Context& ctx) {
    const EmbedConfig& embed = ctx.config.embed;
    if (embed.mode == "hash")
        return std::make_unique<HashEmbeddingsBackend>(embed.dim, ctx.config.seed);
    EndpointConfig endpoint;
    endpoint.base_url = embed.base_url;
    endpoint.model = embed.model;
    endpoint.api_token = ctx.config.embed_token();
    endpoint.max_retries = embed.max_retries;
    endpoint.retry_backoff_ms = embed.retry_backoff_ms;
    return std::make_unique<HttpEmbeddingsBackend>(endpoint, embed.dim);
}

EmbedderOptions embed_options(const Context& ctx) {
    EmbedderOptions options;
    options.prefix = ctx.config.embed.prefix;
    options.batch_size = ctx.config.embed.batch_size;
    options.concurrency = ctx.config.embed.concurrency;
    return options;
}

// --- shared loaders -----------------------------------------------------------

Corpus load_normalized_corpus(const Context& ctx) {
    require_artifact(ctx.corpus_file(), "ingest");
    auto result = load_corpus(ctx.corpus_file().string());
    if (!result.issues.empty())
        throw UserError("normalized corpus has issues; re-run `narramap ingest`");
    return std::move(result.corpus);
}

std::vector<ExtractionRecord> load_records(const Context& ctx) {
    require_artifact(ctx.extraction_file(), "extract");
    return load_extraction_records(ctx.extraction_file().string());
}

struct ClusterArtifacts {
    std::vector<std::string> ids;
    std::vector<int> labels;
    ClusterModel model;  // k, silhouette, post_ops reconstructed from meta
};

ClusterArtifacts load_cluster_artifacts(const Context& ctx) {
    require_artifact(ctx.assignment_file(), "cluster");
    require_artifact(ctx.cluster_meta_file(), "cluster");
    ClusterArtifacts art;
    std::tie(art.ids, art.labels) = read_assignment_csv(ctx.assignment_file());
    std::ifstream in(ctx.cluster_meta_file(), std::ios::binary);
    json meta;
    in >> meta;
    art.model.k = meta.at("k").get<int>();
    // dumped NaN (post-ops down to one cluster) serializes as null
    art.model.silhouette_score = meta.at("silhouette").is_null()
                                     ? std::numeric_limits<double>::quiet_NaN()
                                     : meta.at("silhouette").get<double>();
    art.model.labels = art.labels;
    for (const auto& op : meta.value("post_ops", json::array())) {
        PostOp post;
        post.op = op.at("op").get<std::string>();
        post.arg_a = op.value("a", -1);
        post.arg_b = op.value("b", -1);
        post.k_after = op.value("k_after", 0);
        art.model.post_ops.push_back(post);
    }
    return art;
}

void save_cluster_meta(const Context& ctx, const ClusterModel& model) {
    json meta;
    meta["k"] = model.k;
    meta["silhouette"] = model.silhouette_score;
    meta["post_ops"] = json::array();
    for (const auto& op : model.post_ops)
        meta["post_ops"].push_back(
            {{"op", op.op}, {"a", op.arg_a}, {"b", op.arg_b}, {"k_after", op.k_after}});
    auto out = open_out(ctx.cluster_meta_file());
    out << meta.dump(2) << "\n";
}

std::vector<AnalyzedArticle> assemble_analyzed(const Context& ctx, const Corpus& corpus,
                                               const std::vector<ExtractionRecord>& records,
                                               const ClusterArtifacts& clusters) {
    std::map<std::string, const Article*> article_by_id;
    for (const auto& a : corpus.articles) article_by_id[a.id] = &a;
    std::map<std::string, int> label_by_id;
    for (std::size_t i = 0; i < clusters.ids.size(); ++i)
        label_by_id[clusters.ids[i]] = clusters.labels[i];

    std::vector<AnalyzedArticle> analyzed;
    for (const auto& rec : records) {
        if (rec.status != ExtractionStatus::Ok) continue;
        const auto label_it = label_by_id.find(rec.article_id);
        if (label_it == label_by_id.end() || label_it->second < 0) continue;  // dropped
        const auto art_it = article_by_id.find(rec.article_id);
        if (art_it == article_by_id.end())
            throw UserError("article " + rec.article_id + " missing from normalized corpus");
        AnalyzedArticle a;
        a.id = rec.article_id;
        a.source = art_it->second->source;
        a.published_at = art_it->second->published_at;
        a.model = *rec.model;
        a.cluster = label_it->second;
        analyzed.push_back(std::move(a));
    }
    return analyzed;
}

// --- commands -----------------------------------------------------------------

int cmd_ingest(Context& ctx) {
    const fs::path source = resolve(ctx.config_dir, ctx.config.corpus_path);
    if (!fs::exists(source)) throw UserError("corpus file not found: " + source.string());

    Manifest manifest(ctx.manifest_file());
    const json params = {{"keywords", ctx.config.keywords}};
    const std::map<std::string, std::string> inputs = {{source.string(), hash_file(source)}};
    const std::vector<fs::path> outputs = {ctx.corpus_file()};
    if (manifest.up_to_date("ingest", params, inputs, outputs)) {
        std::cout << "ingest: up to date\n";
        return kExitOk;
    }

    auto result = load_corpus(source.string());
    for (const auto& issue : result.issues)
        std::cerr << "ingest: line " << issue.line << ": " << issue.message << "\n";

    Corpus corpus = std::move(result.corpus);
    const std::size_t before = corpus.size();
    if (!ctx.config.keywords.empty()) corpus = filter_by_keywords(corpus, ctx.config.keywords);

    std::map<std::string, std::size_t> kept_word_count;
    std::map<std::string, std::pair<std::size_t, std::size_t>> per_source;  // count, words
    for (const auto& a : corpus.articles) {
        kept_word_count[a.id] = a.word_count;
        auto& slot = per_source[a.source];
        slot.first += 1;
        slot.second += a.word_count;
    }

    // re-stream the source file so unknown keys survive into the normalized
    // corpus; word_count is the only added field
    {
        auto out = open_out(ctx.corpus_file());
        std::ifstream in(source, std::ios::binary);
        std::string line;
        std::set<std::string> written;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            json obj = json::parse(line, nullptr, false);
            if (obj.is_discarded() || !obj.is_object() || !obj.contains("id") ||
                !obj["id"].is_string())
                continue;
            const std::string id = obj["id"].get<std::string>();
            const auto it = kept_word_count.find(id);
            if (it == kept_word_count.end() || !written.insert(id).second) continue;
            obj["word_count"] = it->second;
            out << obj.dump() << "\n";
        }
    }

    bool dated = true;
    for (const auto& a : corpus.articles) dated = dated && a.published_at.has_value();
    std::vector<fs::path> all_outputs = outputs;
    if (dated && !corpus.empty()) {
        write_weekly_counts(weekly_counts(corpus, true), ctx.out / "weekly_counts.csv");
        all_outputs.push_back(ctx.out / "weekly_counts.csv");
    }

    json summary;
    summary["articles_in"] = before;
    summary["articles_kept"] = corpus.size();
    summary["load_issues"] = result.issues.size();
    for (const auto& [src, stats] : per_source) {
        summary["sources"][src]["articles"] = stats.first;
        summary["sources"][src]["mean_word_count"] =
            stats.first ? static_cast<double>(stats.second) / stats.first : 0.0;
    }
    open_out(ctx.out / "corpus_summary.json") << summary.dump(2) << "\n";
    all_outputs.push_back(ctx.out / "corpus_summary.json");

    manifest.record("ingest", params, inputs, all_outputs, ctx.config.seed);
    std::cout << "ingest: " << corpus.size() << " of " << before << " articles kept, "
              << result.issues.size() << " line issue(s)\n";
    return kExitOk;
}

int cmd_extract(Context& ctx) {
    const Corpus corpus = load_normalized_corpus(ctx);

    Manifest manifest(ctx.manifest_file());
    const json params = {{"mode", ctx.config.chat.mode},
                         {"model", ctx.config.chat.model},
                         {"truncate_chars", ctx.config.chat.truncate_chars}};
    const std::map<std::string, std::string> inputs = {
        {ctx.corpus_file().string(), hash_file(ctx.corpus_file())}};
    const std::vector<fs::path> outputs = {ctx.extraction_file()};
    if (manifest.up_to_date("extract", params, inputs, outputs)) {
        std::cout << "extract: up to date\n";
        return kExitOk;
    }

    auto backend = make_chat_backend(ctx);
    FileCache cache(ctx.cache_dir / "chat");
    ExtractOptions options;
    options.concurrency = ctx.config.chat.concurrency;
    options.truncate_chars = ctx.config.chat.truncate_chars;
    const auto records = extract_corpus(corpus, *backend, cache, options);

    std::size_t ok = 0, parse_errors = 0, endpoint_errors = 0, cache_hits = 0;
    for (const auto& rec : records) {
        ok += rec.status == ExtractionStatus::Ok;
        parse_errors += rec.status == ExtractionStatus::ParseError;
        endpoint_errors += rec.status == ExtractionStatus::EndpointError;
        cache_hits += rec.from_cache;
    }
    save_extraction_records(records, ctx.extraction_file().string());
    manifest.record("extract", params, inputs, outputs, ctx.config.seed);
    std::cout << "extract: " << ok << " ok, " << parse_errors << " parse errors, "
              << endpoint_errors << " endpoint errors; cache hits " << cache_hits << "/"
              << records.size() << "\n";
    return kExitOk;
}

int cmd_embed(Context& ctx) {
    const auto records = load_records(ctx);

    Manifest manifest(ctx.manifest_file());
    const json params = {{"mode", ctx.config.embed.mode},
                         {"model", ctx.config.embed.model},
                         {"dim", ctx.config.embed.dim},
                         {"prefix", ctx.config.embed.prefix},
                         {"seed", ctx.config.seed}};
    const std::map<std::string, std::string> inputs = {
        {ctx.extraction_file().string(), hash_file(ctx.extraction_file())}};
    const std::vector<fs::path> outputs = {ctx.vectors_file()};
    if (manifest.up_to_date("embed", params, inputs, outputs)) {
        std::cout << "embed: up to date\n";
        return kExitOk;
    }

    auto backend = make_embeddings_backend(ctx);
    FileCache cache(ctx.cache_dir / "embeddings");
    const ActantEmbeddings embeddings = embed_actants(records, *backend, cache, embed_options(ctx));

    VectorStore store;
    store.dim = embeddings.dim;
    store.model_id = embeddings.model_id;
    for (std::size_t i = 0; i < embeddings.ids.size(); ++i)
        for (std::size_t r = 0; r < kNumRoles; ++r)
            if (embeddings.vectors[i][r])
                store.rows.push_back(
                    {embeddings.ids[i], role_name(kRoleOrder[r]), *embeddings.vectors[i][r]});
    save_vector_store(store, ctx.vectors_file().string());
    manifest.record("embed", params, inputs, outputs, ctx.config.seed);
    std::cout << "embed: " << store.rows.size() << " actant vectors for " << embeddings.ids.size()
              << " articles (cache hits " << embeddings.cache_hits << ", requests "
              << embeddings.requested << ")\n";
    return kExitOk;
}

ActantEmbeddings load_actant_embeddings(const Context& ctx,
                                        const std::vector<ExtractionRecord>& records) {
    require_artifact(ctx.vectors_file(), "embed");
    const VectorStore store = load_vector_store(ctx.vectors_file().string());
    std::map<std::pair<std::string, std::string>, const Vec*> by_key;
    for (const auto& row : store.rows) by_key[{row.id, row.role}] = &row.values;

    ActantEmbeddings embeddings;
    embeddings.dim = store.dim;
    embeddings.model_id = store.model_id;
    for (const auto& rec : records) {
        if (rec.status != ExtractionStatus::Ok) continue;
        embeddings.ids.push_back(rec.article_id);
        RoleVectors rv;
        for (std::size_t r = 0; r < kNumRoles; ++r) {
            if (!rec.model->primary(kRoleOrder[r])) continue;
            const auto it = by_key.find({rec.article_id, role_name(kRoleOrder[r])});
            if (it == by_key.end())
                throw UserError("vector store is missing " + rec.article_id + "/" +
                                role_name(kRoleOrder[r]) + "; re-run `narramap embed`");
            rv[r] = *it->second;
        }
        embeddings.vectors.push_back(std::move(rv));
    }
    return embeddings;
}

int cmd_build(Context& ctx) {
    const auto records = load_records(ctx);
    require_artifact(ctx.vectors_file(), "embed");

    Manifest manifest(ctx.manifest_file());
    const json params = {{"svd_dim", ctx.config.svd_dim},
                         {"fit_scope", to_string(ctx.config.fit_scope)}};
    const std::map<std::string, std::string> inputs = {
        {ctx.extraction_file().string(), hash_file(ctx.extraction_file())},
        {ctx.vectors_file().string(), hash_file(ctx.vectors_file())}};
    std::vector<fs::path> outputs = {ctx.matrix_file(), ctx.matrix_ids_file(),
                                     ctx.matrix_meta_file()};
    for (ActantRole role : kRoleOrder) outputs.push_back(ctx.reducer_file(role_name(role)));
    if (manifest.up_to_date("build", params, inputs, outputs)) {
        std::cout << "build: up to date\n";
        return kExitOk;
    }

    const ActantEmbeddings embeddings = load_actant_embeddings(ctx, records);
    const NarrativeMatrix nm =
        build_narrative_matrix(embeddings, ctx.config.svd_dim, ctx.config.fit_scope);
    fs::create_directories(ctx.out / "reducers");
    for (std::size_t r = 0; r < kNumRoles; ++r)
        save_reducer(nm.reducers[r], ctx.reducer_file(role_name(kRoleOrder[r])).string());
    save_narrative_matrix(nm, ctx.matrix_file().string(), ctx.matrix_ids_file().string(),
                          ctx.matrix_meta_file().string());
    manifest.record("build", params, inputs, outputs, ctx.config.seed);
    std::cout << "build: " << nm.matrix.rows << "x" << nm.matrix.cols
              << " narrative matrix (d=" << ctx.config.svd_dim << ", "
              << to_string(ctx.config.fit_scope) << ")\n";
    return kExitOk;
}

json umap_params_json(const UmapParams& p) {
    return {{"n_neighbors", p.n_neighbors}, {"min_dist", p.min_dist},
            {"n_components", p.n_components}, {"n_epochs", p.n_epochs},
            {"metric", to_string(p.metric)}, {"seed", p.seed}};
}

int cmd_project(Context& ctx) {
    require_artifact(ctx.matrix_file(), "build");

    Manifest manifest(ctx.manifest_file());
    const json params = umap_params_json(ctx.config.umap);
    const std::map<std::string, std::string> inputs = {
        {ctx.matrix_file().string(), hash_file(ctx.matrix_file())},
        {ctx.matrix_ids_file().string(), hash_file(ctx.matrix_ids_file())}};
    const std::vector<fs::path> outputs = {ctx.projection_file()};
    if (manifest.up_to_date("project", params, inputs, outputs)) {
        std::cout << "project: up to date\n";
        return kExitOk;
    }

    const NarrativeMatrix nm =
        load_narrative_matrix(ctx.matrix_file().string(), ctx.matrix_ids_file().string(),
                              ctx.matrix_meta_file().string());
    UmapParams umap = ctx.config.umap;
    if (umap.n_neighbors >= static_cast<int>(nm.matrix.rows)) {
        umap.n_neighbors = static_cast<int>(nm.matrix.rows) - 1;
        std::cerr << "project: n_neighbors clamped to " << umap.n_neighbors << " (N="
                  << nm.matrix.rows << ")\n";
    }
    const Matrix layout = umap_project(nm.matrix, umap);
    write_projection_csv(nm.ids, layout, ctx.projection_file());
    manifest.record("project", params, inputs, outputs, ctx.config.seed);
    std::cout << "project: " << layout.rows << " points -> " << umap.n_components << "D\n";
    return kExitOk;
}

int cmd_cluster(Context& ctx) {
    require_artifact(ctx.projection_file(), "project");

    Manifest manifest(ctx.manifest_file());
    const json params = {{"k_min", ctx.config.k_min}, {"k_max", ctx.config.k_max}};
    const std::map<std::string, std::string> inputs = {
        {ctx.projection_file().string(), hash_file(ctx.projection_file())}};
    const std::vector<fs::path> outputs = {ctx.assignment_file(), ctx.score_table_file(),
                                           ctx.cluster_meta_file()};
    if (manifest.up_to_date("cluster", params, inputs, outputs)) {
        std::cout << "cluster: up to date\n";
        return kExitOk;
    }

    const auto [ids, layout] = read_projection_csv(ctx.projection_file());
    if (layout.rows < 3) throw UserError("too few points to cluster: " + std::to_string(layout.rows));
    const std::size_t k_max = std::min(ctx.config.k_max, layout.rows - 1);
    const Dendrogram dendro = ward_cluster(layout);
    const ClusterModel model = select_k(layout, dendro, ctx.config.k_min, k_max);

    write_assignment_csv(ids, model.labels, ctx.assignment_file());
    write_score_table_csv(model.score_table, ctx.score_table_file());
    save_cluster_meta(ctx, model);
    manifest.record("cluster", params, inputs, outputs, ctx.config.seed);
    std::cout << "cluster: k*=" << model.k << " silhouette=" << fixed6(model.silhouette_score)
              << " (searched k in [" << ctx.config.k_min << "," << k_max << "])\n";
    return kExitOk;
}

int cmd_post(Context& ctx, const std::vector<std::string>& drops,
             const std::vector<std::string>& merges) {
    if (drops.empty() && merges.empty())
        throw UserError("post: nothing to do; pass --drop and/or --merge");
    require_artifact(ctx.projection_file(), "project");
    ClusterArtifacts art = load_cluster_artifacts(ctx);
    const auto [ids, layout] = read_projection_csv(ctx.projection_file());
    if (ids != art.ids) throw UserError("projection and assignment are out of sync; re-run `narramap cluster`");

    ClusterModel model = art.model;
    model.silhouette_score = silhouette(layout, model.labels);
    for (const auto& drop : drops) model = drop_cluster(model, layout, std::stoi(drop));
    for (const auto& merge : merges) {
        const auto comma = merge.find(',');
        if (comma == std::string::npos)
            throw UserError("post: --merge expects \"a,b\", got \"" + merge + "\"");
        model = merge_clusters(model, layout, std::stoi(merge.substr(0, comma)),
                               std::stoi(merge.substr(comma + 1)));
    }

    write_assignment_csv(ids, model.labels, ctx.assignment_file());
    save_cluster_meta(ctx, model);
    Manifest manifest(ctx.manifest_file());
    json params = {{"drops", drops}, {"merges", merges}};
    manifest.record("post", params,
                    {{ctx.projection_file().string(), hash_file(ctx.projection_file())}},
                    {ctx.assignment_file(), ctx.cluster_meta_file()}, ctx.config.seed);
    std::cout << "post: k=" << model.k << " after " << model.post_ops.size()
              << " audit-logged operation(s)\n";
    return kExitOk;
}

int cmd_report(Context& ctx) {
    const Corpus corpus = load_normalized_corpus(ctx);
    const auto records = load_records(ctx);
    const ClusterArtifacts clusters = load_cluster_artifacts(ctx);
    require_artifact(ctx.projection_file(), "project");

    Manifest manifest(ctx.manifest_file());
    const json params = {{"label_threshold", ctx.config.label_threshold},
                         {"table_min_share", ctx.config.table_min_share},
                         {"table_top_actors", ctx.config.table_top_actors}};
    const std::map<std::string, std::string> inputs = {
        {ctx.corpus_file().string(), hash_file(ctx.corpus_file())},
        {ctx.extraction_file().string(), hash_file(ctx.extraction_file())},
        {ctx.assignment_file().string(), hash_file(ctx.assignment_file())},
        {ctx.projection_file().string(), hash_file(ctx.projection_file())}};

    const fs::path dir = ctx.reports_dir();
    const std::vector<fs::path> outputs = {
        dir / "labels.csv",          dir / "labels.json",
        dir / "actor_table.csv",     dir / "actor_table.json",
        dir / "syncretisms.csv",     dir / "syncretisms.json",
        dir / "missing_actants.csv", dir / "missing_actants.json",
        dir / "source_shares.csv",   dir / "source_shares.json",
        dir / "cluster_map.svg",     dir / "run_params.json"};
    // component timelines are optional, depending on config

    // the projection/clustering knobs behind these tables are assumptions,
    // not published values; they ship with every report bundle
    {
        json run_params;
        run_params["umap"] = umap_params_json(ctx.config.umap);
        run_params["svd_dim"] = ctx.config.svd_dim;
        run_params["fit_scope"] = to_string(ctx.config.fit_scope);
        run_params["k_range"] = {ctx.config.k_min, ctx.config.k_max};
        run_params["label_threshold"] = ctx.config.label_threshold;
        run_params["table_min_share"] = ctx.config.table_min_share;
        run_params["seed"] = ctx.config.seed;
        run_params["embed_model"] = ctx.config.embed.model;
        run_params["chat_model"] = ctx.config.chat.model;
        open_out(dir / "run_params.json") << run_params.dump(2) << "\n";
    }

    const auto analyzed = assemble_analyzed(ctx, corpus, records, clusters);
    if (analyzed.empty()) throw UserError("no analyzed articles; check extraction status");

    const auto labels = label_clusters(analyzed, ctx.config.label_threshold);
    write_labels(labels, dir / "labels.csv", dir / "labels.json");
    write_actor_table(actor_table(analyzed, ctx.config.table_min_share, ctx.config.table_top_actors),
                      dir / "actor_table.csv", dir / "actor_table.json");
    write_syncretisms(syncretism_report(analyzed), dir / "syncretisms.csv", dir / "syncretisms.json");
    write_missing_stats(missing_actant_stats(analyzed), dir / "missing_actants.csv",
                        dir / "missing_actants.json");
    write_source_shares(source_shares(analyzed), dir / "source_shares.csv",
                        dir / "source_shares.json");

    std::vector<fs::path> all_outputs = outputs;
    bool dated = true;
    for (const auto& a : analyzed) dated = dated && a.published_at.has_value();
    if (!ctx.config.components.empty() && dated) {
        const auto series = component_timeline(analyzed, ctx.config.components, true);
        write_timeline(series, dir / "component_timeline.csv", dir / "component_timeline.json");
        all_outputs.push_back(dir / "component_timeline.csv");
        all_outputs.push_back(dir / "component_timeline.json");
    }

    // map uses the full projection, including dropped points in gray
    const auto [ids, layout] = read_projection_csv(ctx.projection_file());
    std::map<std::string, int> label_by_id;
    for (std::size_t i = 0; i < clusters.ids.size(); ++i)
        label_by_id[clusters.ids[i]] = clusters.labels[i];
    std::vector<int> point_labels;
    point_labels.reserve(ids.size());
    for (const auto& id : ids) {
        const auto it = label_by_id.find(id);
        point_labels.push_back(it == label_by_id.end() ? -1 : it->second);
    }
    write_cluster_svg(layout, point_labels, labels, dir / "cluster_map.svg");

    manifest.record("report", params, inputs, all_outputs, ctx.config.seed);
    std::cout << "report: " << labels.size() << " clusters over " << analyzed.size()
              << " articles -> " << dir.string() << "\n";
    return kExitOk;
}

int cmd_baseline(Context& ctx) {
    const Corpus corpus = load_normalized_corpus(ctx);
    const auto records = load_records(ctx);
    const ClusterArtifacts clusters = load_cluster_artifacts(ctx);

    Manifest manifest(ctx.manifest_file());
    json pairs_json = json::array();
    for (const auto& [a, b] : ctx.config.baseline_pairs) pairs_json.push_back({a, b});
    const json params = {{"umap", umap_params_json(ctx.config.umap)},
                         {"k_min", ctx.config.k_min},
                         {"k_max", ctx.config.k_max},
                         {"pairs", pairs_json},
                         {"embed_model", ctx.config.embed.model}};
    const std::map<std::string, std::string> inputs = {
        {ctx.corpus_file().string(), hash_file(ctx.corpus_file())},
        {ctx.assignment_file().string(), hash_file(ctx.assignment_file())}};
    const fs::path dir = ctx.baseline_dir();
    const std::vector<fs::path> outputs = {dir / "projection.csv", dir / "assignment.csv",
                                           dir / "comparison.json"};
    if (manifest.up_to_date("baseline", params, inputs, outputs)) {
        std::cout << "baseline: up to date\n";
        return kExitOk;
    }

    std::map<std::string, const Article*> article_by_id;
    for (const auto& a : corpus.articles) article_by_id[a.id] = &a;
    std::map<std::string, int> label_by_id;
    for (std::size_t i = 0; i < clusters.ids.size(); ++i)
        label_by_id[clusters.ids[i]] = clusters.labels[i];

    std::vector<const Article*> articles;
    std::vector<int> narrative_labels;
    std::vector<std::string> ids;
    for (const auto& rec : records) {
        if (rec.status != ExtractionStatus::Ok) continue;
        const auto lit = label_by_id.find(rec.article_id);
        if (lit == label_by_id.end()) continue;
        const auto ait = article_by_id.find(rec.article_id);
        if (ait == article_by_id.end()) continue;
        articles.push_back(ait->second);
        narrative_labels.push_back(lit->second);
        ids.push_back(rec.article_id);
    }
    if (articles.size() < 4) throw UserError("baseline: too few articles");

    auto backend = make_embeddings_backend(ctx);
    FileCache cache(ctx.cache_dir / "embeddings");
    const BaselineResult result = baseline_whole_text(
        articles, narrative_labels, *backend, cache, embed_options(ctx), ctx.config.umap,
        ctx.config.k_min, ctx.config.k_max, ctx.config.baseline_pairs);

    write_projection_csv(ids, result.layout, dir / "projection.csv");
    write_assignment_csv(ids, result.model.labels, dir / "assignment.csv");
    json comparison;
    comparison["baseline_k"] = result.model.k;
    comparison["baseline_silhouette"] = result.model.silhouette_score;
    comparison["global_ari"] = result.global_ari;
    comparison["pairs"] = json::array();
    for (const auto& p : result.pairs)
        comparison["pairs"].push_back({{"narrative_cluster_a", p.narrative_cluster_a},
                                       {"narrative_cluster_b", p.narrative_cluster_b},
                                       {"articles", p.articles},
                                       {"ari", p.ari}});
    open_out(dir / "comparison.json") << comparison.dump(2) << "\n";

    manifest.record("baseline", params, inputs, outputs, ctx.config.seed);
    std::cout << "baseline: k=" << result.model.k << " global ARI vs narrative labels "
              << fixed6(result.global_ari) << "\n";
    return kExitOk;
}

int cmd_dimstudy(Context& ctx, const std::string& dims_arg, const std::string& methods_arg) {
    const auto records = load_records(ctx);
    require_artifact(ctx.vectors_file(), "embed");

    std::vector<std::size_t> dims;
    {
        std::stringstream ss(dims_arg);
        std::string item;
        while (std::getline(ss, item, ',')) dims.push_back(std::stoul(item));
    }
    std::vector<DimStudyMethod> methods;
    {
        std::stringstream ss(methods_arg);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item == "svd") methods.push_back(DimStudyMethod::Svd);
            else if (item == "pca") methods.push_back(DimStudyMethod::Pca);
            else if (item == "umap") methods.push_back(DimStudyMethod::Umap);
            else throw UserError("dimstudy: unknown method \"" + item + "\"");
        }
    }
    if (dims.empty() || methods.empty()) throw UserError("dimstudy: need --dims and --methods");

    Manifest manifest(ctx.manifest_file());
    const json params = {{"dims", dims_arg}, {"methods", methods_arg},
                         {"umap", umap_params_json(ctx.config.umap)}};
    const std::map<std::string, std::string> inputs = {
        {ctx.vectors_file().string(), hash_file(ctx.vectors_file())}};
    const std::vector<fs::path> outputs = {ctx.out / "dimstudy.csv", ctx.out / "dimstudy.json"};
    if (manifest.up_to_date("dimstudy", params, inputs, outputs)) {
        std::cout << "dimstudy: up to date\n";
        return kExitOk;
    }

    // the pooled, non-unique set of all actant vectors
    const VectorStore store = load_vector_store(ctx.vectors_file().string());
    std::vector<Vec> pooled;
    pooled.reserve(store.rows.size());
    for (const auto& row : store.rows) pooled.push_back(row.values);
    if (pooled.size() < 2) throw UserError("dimstudy: not enough actant vectors");

    DimStudyOptions options;
    options.umap = ctx.config.umap;
    const DimStudyResult study = dim_study(pooled, dims, methods, options);

    {
        auto out = open_out(ctx.out / "dimstudy.csv");
        out << "method,dimension,average_subdiagonal_similarity,available\n";
        for (const auto& e : study.entries)
            out << to_string(e.method) << "," << e.dimension << ","
                << (e.available ? fixed6(e.average_similarity) : std::string("")) << ","
                << (e.available ? "true" : "false") << "\n";
    }
    json arr = json::array();
    for (const auto& e : study.entries) {
        json entry = {{"method", to_string(e.method)},
                      {"dimension", e.dimension},
                      {"available", e.available}};
        if (e.available) entry["average_subdiagonal_similarity"] = e.average_similarity;
        arr.push_back(entry);
    }
    open_out(ctx.out / "dimstudy.json") << arr.dump(2) << "\n";

    manifest.record("dimstudy", params, inputs, outputs, ctx.config.seed);
    std::cout << "dimstudy: " << study.entries.size() << " (method, dim) entries over "
              << pooled.size() << " pooled actant vectors\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"narrative-structured text embedding pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override, cache_override;
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--out", out_override, "output directory (overrides config)");
    app.add_option("--cache", cache_override, "cache directory (overrides config)");
    auto* seed_opt = app.add_option("--seed", seed_override, "seed (overrides config)");

    std::vector<std::string> drops, merges;
    std::string dims_arg = "2,8,34";
    std::string methods_arg = "svd,pca,umap";

    auto* ingest = app.add_subcommand("ingest", "load, validate, filter, summarize the corpus");
    auto* extract = app.add_subcommand("extract", "extract actantial models via the chat endpoint");
    auto* embed = app.add_subcommand("embed", "embed primary actors per role");
    auto* build = app.add_subcommand("build", "fit SVD reducers and build narrative embeddings");
    auto* project = app.add_subcommand("project", "UMAP projection to 2D");
    auto* cluster = app.add_subcommand("cluster", "ward clustering with silhouette selection");
    auto* post = app.add_subcommand("post", "manual drop/merge post-processing");
    post->add_option("--drop", drops, "cluster id to drop (repeatable)");
    post->add_option("--merge", merges, "pair \"a,b\" to merge (repeatable)");
    auto* report = app.add_subcommand("report", "write all report tables and the cluster map");
    auto* baseline = app.add_subcommand("baseline", "whole-text embedding baseline comparison");
    auto* dimstudy = app.add_subcommand("dimstudy", "similarity-vs-dimension study (svd/pca/umap)");
    dimstudy->add_option("--dims", dims_arg, "comma-separated target dimensions");
    dimstudy->add_option("--methods", methods_arg, "comma-separated methods: svd,pca,umap");

    CLI11_PARSE(app, argc, argv);
    seed_set = seed_opt->count() > 0;

    try {
        std::vector<ConfigError> errors;
        RunConfig config = load_config(config_path, errors);
        if (!errors.empty()) {
            for (const auto& e : errors) std::cerr << "config error: " << e.field << ": " << e.message << "\n";
            return kExitUserError;
        }
        if (!out_override.empty()) config.out_dir = out_override;
        if (!cache_override.empty()) config.cache_dir = cache_override;
        if (seed_set) {
            config.seed = seed_override;
            config.umap.seed = seed_override;
        }

        Context ctx;
        ctx.config = std::move(config);
        ctx.config_dir = fs::absolute(fs::path(config_path)).parent_path();
        ctx.out = fs::path(ctx.config.out_dir);
        ctx.cache_dir = fs::path(ctx.config.cache_dir);
        fs::create_directories(ctx.out);

        if (*ingest) return cmd_ingest(ctx);
        if (*extract) return cmd_extract(ctx);
        if (*embed) return cmd_embed(ctx);
        if (*build) return cmd_build(ctx);
        if (*project) return cmd_project(ctx);
        if (*cluster) return cmd_cluster(ctx);
        if (*post) return cmd_post(ctx, drops, merges);
        if (*report) return cmd_report(ctx);
        if (*baseline) return cmd_baseline(ctx);
        if (*dimstudy) return cmd_dimstudy(ctx, dims_arg, methods_arg);
        return kExitUserError;
    } catch (const UserError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUserError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUserError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternalError;
    }
}
