#pragma once

// Report writers: each table goes out as CSV and JSON, the cluster map as
// SVG. All numeric formatting is fixed-precision so identical runs produce
// byte-identical files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "narramap/analysis.hpp"
#include "narramap/cluster.hpp"
#include "narramap/corpus.hpp"
#include "narramap/matrix.hpp"

namespace narramap {

inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

inline std::string fixed6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

// --- projection -------------------------------------------------------------

inline void write_projection_csv(const std::vector<std::string>& ids, const Matrix& layout,
                                 const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "article_id,x,y\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out << csv_escape(ids[i]);
        for (std::size_t c = 0; c < layout.cols; ++c) out << "," << fixed6(layout(i, c));
        out << "\n";
    }
}

inline std::pair<std::vector<std::string>, Matrix> read_projection_csv(
    const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read projection: " + path.string());
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::string> ids;
    std::vector<Vec> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        // fields never contain commas here: ids are written unquoted when clean
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            const std::size_t pos = line.find(',', start);
            parts.push_back(line.substr(start, pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        if (parts.size() < 3) throw std::runtime_error("bad projection row: " + line);
        ids.push_back(parts[0]);
        Vec coords;
        for (std::size_t c = 1; c < parts.size(); ++c) coords.push_back(std::stod(parts[c]));
        rows.push_back(coords);
    }
    return {ids, Matrix::from_rows(rows)};
}

// --- cluster assignment ------------------------------------------------------

inline void write_assignment_csv(const std::vector<std::string>& ids,
                                 const std::vector<int>& labels,
                                 const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "article_id,cluster_id\n";
    for (std::size_t i = 0; i < ids.size(); ++i)
        out << csv_escape(ids[i]) << "," << labels[i] << "\n";
}

inline std::pair<std::vector<std::string>, std::vector<int>> read_assignment_csv(
    const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read assignment: " + path.string());
    std::string line;
    std::getline(in, line);
    std::vector<std::string> ids;
    std::vector<int> labels;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t pos = line.rfind(',');
        if (pos == std::string::npos) throw std::runtime_error("bad assignment row: " + line);
        ids.push_back(line.substr(0, pos));
        labels.push_back(std::stoi(line.substr(pos + 1)));
    }
    return {ids, labels};
}

inline void write_score_table_csv(const std::vector<std::pair<std::size_t, double>>& table,
                                  const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "k,silhouette\n";
    for (const auto& [k, score] : table) out << k << "," << fixed6(score) << "\n";
}

// --- report tables ------------------------------------------------------------

inline void write_labels(const std::vector<ClusterLabelSpec>& specs,
                         const std::filesystem::path& csv_path,
                         const std::filesystem::path& json_path) {
    {
        auto out = open_out(csv_path);
        out << "cluster_id,label\n";
        for (const auto& spec : specs)
            out << spec.cluster_id << "," << csv_escape(spec.label) << "\n";
    }
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& spec : specs) {
        nlohmann::json entry;
        entry["cluster_id"] = spec.cluster_id;
        entry["label"] = spec.label;
        entry["entries"] = nlohmann::json::array();
        for (const auto& e : spec.entries)
            entry["entries"].push_back({{"actor", e.actor}, {"codes", e.codes}});
        arr.push_back(entry);
    }
    open_out(json_path) << arr.dump(2) << "\n";
}

inline void write_actor_table(const std::vector<ActorTableRow>& rows,
                              const std::filesystem::path& csv_path,
                              const std::filesystem::path& json_path) {
    {
        auto out = open_out(csv_path);
        out << "cluster_id,role,actor,share,count\n";
        for (const auto& r : rows)
            out << r.cluster_id << "," << role_name(r.role) << "," << csv_escape(r.actor) << ","
                << fixed6(r.share) << "," << r.count << "\n";
    }
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows)
        arr.push_back({{"cluster_id", r.cluster_id},
                       {"role", role_name(r.role)},
                       {"actor", r.actor},
                       {"share", r.share},
                       {"count", r.count}});
    open_out(json_path) << arr.dump(2) << "\n";
}

inline void write_syncretisms(const std::vector<SyncretismRow>& rows,
                              const std::filesystem::path& csv_path,
                              const std::filesystem::path& json_path) {
    {
        auto out = open_out(csv_path);
        out << "syncretism,share,count,top_actors\n";
        for (const auto& r : rows) {
            std::string actors;
            for (const auto& a : r.top_actors) {
                if (!actors.empty()) actors += "; ";
                actors += a.actor + " (" + fixed6(a.share_within_pair) + ")";
            }
            out << role_name(r.pair.a) << "-" << role_name(r.pair.b) << "," << fixed6(r.share)
                << "," << r.count << "," << csv_escape(actors) << "\n";
        }
    }
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json entry;
        entry["pair"] = std::string(role_name(r.pair.a)) + "-" + role_name(r.pair.b);
        entry["share"] = r.share;
        entry["count"] = r.count;
        entry["top_actors"] = nlohmann::json::array();
        for (const auto& a : r.top_actors)
            entry["top_actors"].push_back(
                {{"actor", a.actor}, {"share_within_pair", a.share_within_pair}, {"count", a.count}});
        arr.push_back(entry);
    }
    open_out(json_path) << arr.dump(2) << "\n";
}

inline void write_missing_stats(const MissingActantStats& stats,
                                const std::filesystem::path& csv_path,
                                const std::filesystem::path& json_path) {
    {
        auto out = open_out(csv_path);
        out << "cluster_id";
        for (ActantRole role : kRoleOrder) out << ",missing_" << role_name(role);
        out << "\n";
        out << "overall";
        for (std::size_t r = 0; r < kNumRoles; ++r) out << "," << fixed6(stats.overall[r]);
        out << "\n";
        for (const auto& [cluster, shares] : stats.per_cluster) {
            out << cluster;
            for (std::size_t r = 0; r < kNumRoles; ++r) out << "," << fixed6(shares[r]);
            out << "\n";
        }
    }
    nlohmann::json obj;
    for (std::size_t r = 0; r < kNumRoles; ++r)
        obj["overall"][role_name(kRoleOrder[r])] = stats.overall[r];
    for (const auto& [cluster, shares] : stats.per_cluster)
        for (std::size_t r = 0; r < kNumRoles; ++r)
            obj["per_cluster"][std::to_string(cluster)][role_name(kRoleOrder[r])] = shares[r];
    open_out(json_path) << obj.dump(2) << "\n";
}

inline void write_source_shares(const std::vector<SourceShareRow>& rows,
                                const std::filesystem::path& csv_path,
                                const std::filesystem::path& json_path) {
    std::set<std::string> sources;
    for (const auto& r : rows)
        for (const auto& [source, share] : r.shares) sources.insert(source);
    {
        auto out = open_out(csv_path);
        out << "cluster_id";
        for (const auto& s : sources) out << "," << csv_escape(s);
        out << ",articles\n";
        for (const auto& r : rows) {
            out << r.cluster_id;
            for (const auto& s : sources) {
                const auto it = r.shares.find(s);
                out << "," << fixed6(it == r.shares.end() ? 0.0 : it->second);
            }
            out << "," << r.articles << "\n";
        }
    }
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json entry;
        entry["cluster_id"] = r.cluster_id;
        entry["articles"] = r.articles;
        for (const auto& [source, share] : r.shares) entry["shares"][source] = share;
        arr.push_back(entry);
    }
    open_out(json_path) << arr.dump(2) << "\n";
}

inline void write_timeline(
    const std::map<std::string, std::map<std::pair<std::string, std::string>, std::size_t>>& series,
    const std::filesystem::path& csv_path, const std::filesystem::path& json_path) {
    {
        auto out = open_out(csv_path);
        out << "component,iso_week,source,count\n";
        for (const auto& [component, weeks] : series)
            for (const auto& [key, count] : weeks)
                out << csv_escape(component) << "," << key.first << "," << csv_escape(key.second)
                    << "," << count << "\n";
    }
    nlohmann::json obj;
    for (const auto& [component, weeks] : series) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [key, count] : weeks)
            arr.push_back({{"iso_week", key.first}, {"source", key.second}, {"count", count}});
        obj[component] = arr;
    }
    open_out(json_path) << obj.dump(2) << "\n";
}

inline void write_weekly_counts(
    const std::map<std::pair<std::string, std::string>, std::size_t>& counts,
    const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "iso_week,source,count\n";
    for (const auto& [key, count] : counts)
        out << key.first << "," << csv_escape(key.second) << "," << count << "\n";
}

// --- SVG cluster map ----------------------------------------------------------

// Scatter plot of the 2D layout with per-cluster colors and label
// annotations at cluster centroids. Dropped points are drawn gray.
inline void write_cluster_svg(const Matrix& layout, const std::vector<int>& labels,
                              const std::vector<ClusterLabelSpec>& label_specs,
                              const std::filesystem::path& path) {
    if (layout.rows == 0 || layout.cols < 2) throw std::invalid_argument("write_cluster_svg: need 2D layout");
    const double width = 900, height = 700, margin = 40;
    double min_x = layout(0, 0), max_x = layout(0, 0);
    double min_y = layout(0, 1), max_y = layout(0, 1);
    for (std::size_t i = 0; i < layout.rows; ++i) {
        min_x = std::min(min_x, layout(i, 0));
        max_x = std::max(max_x, layout(i, 0));
        min_y = std::min(min_y, layout(i, 1));
        max_y = std::max(max_y, layout(i, 1));
    }
    const double span_x = (max_x > min_x) ? max_x - min_x : 1.0;
    const double span_y = (max_y > min_y) ? max_y - min_y : 1.0;
    auto sx = [&](double x) { return margin + (x - min_x) / span_x * (width - 2 * margin); };
    auto sy = [&](double y) { return height - margin - (y - min_y) / span_y * (height - 2 * margin); };

    int k = 0;
    for (int l : labels) k = std::max(k, l + 1);
    auto color = [&](int cluster) {
        if (cluster < 0) return std::string("#bbbbbb");
        const int hue = (k > 0) ? (cluster * 360 / k) : 0;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "hsl(%d,70%%,45%%)", hue);
        return std::string(buf);
    };

    auto out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < layout.rows; ++i) {
        out << "<circle cx=\"" << fixed6(sx(layout(i, 0))) << "\" cy=\"" << fixed6(sy(layout(i, 1)))
            << "\" r=\"3\" fill=\"" << color(labels[i]) << "\" fill-opacity=\"0.75\"/>\n";
    }
    std::map<int, std::string> label_of;
    for (const auto& spec : label_specs)
        label_of[spec.cluster_id] = spec.label.empty() ? ("cluster " + std::to_string(spec.cluster_id))
                                                       : spec.label;
    std::map<int, std::pair<Vec, std::size_t>> centroid;
    for (std::size_t i = 0; i < layout.rows; ++i) {
        if (labels[i] < 0) continue;
        auto& slot = centroid[labels[i]];
        if (slot.first.empty()) slot.first.assign(2, 0.0);
        slot.first[0] += layout(i, 0);
        slot.first[1] += layout(i, 1);
        slot.second += 1;
    }
    for (const auto& [cluster, acc] : centroid) {
        const double cx = sx(acc.first[0] / acc.second);
        const double cy = sy(acc.first[1] / acc.second);
        std::string text = std::to_string(cluster);
        const auto it = label_of.find(cluster);
        if (it != label_of.end()) text += ": " + it->second;
        out << "<text x=\"" << fixed6(cx) << "\" y=\"" << fixed6(cy)
            << "\" font-size=\"11\" font-family=\"sans-serif\" fill=\"#222\" text-anchor=\"middle\">"
            << xml_escape(text) << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace narramap
