#pragma once

// Corpus loading and bookkeeping. The corpus is a UTF-8 JSON-Lines file with
// one article object per line: required keys "id", "source", "body";
// optional "url", "title", "published_at" (ISO-8601 date). Unknown keys are
// preserved in the file but ignored here.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace narramap {

struct Date {
    int year = 0;
    int month = 0;  // 1..12
    int day = 0;    // 1..31

    bool operator==(const Date&) const = default;
    auto operator<=>(const Date&) const = default;
};

inline bool is_leap_year(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int days_in_month(int y, int m) {
    static const int d[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap_year(y)) return 29;
    return d[m - 1];
}

// Parses "YYYY-MM-DD"; a longer ISO-8601 timestamp is accepted by taking the
// date part before 'T' or ' '.
inline std::optional<Date> parse_date(const std::string& s) {
    std::string t = s;
    if (t.size() > 10 && (t[10] == 'T' || t[10] == ' ')) t = t.substr(0, 10);
    if (t.size() != 10 || t[4] != '-' || t[7] != '-') return std::nullopt;
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (!std::isdigit(static_cast<unsigned char>(t[i]))) return std::nullopt;
    Date d;
    d.year = std::stoi(t.substr(0, 4));
    d.month = std::stoi(t.substr(5, 2));
    d.day = std::stoi(t.substr(8, 2));
    if (d.month < 1 || d.month > 12) return std::nullopt;
    if (d.day < 1 || d.day > days_in_month(d.year, d.month)) return std::nullopt;
    return d;
}

inline std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

inline int day_of_year(const Date& d) {
    static const int cum[] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
    int n = cum[d.month - 1] + d.day;
    if (d.month > 2 && is_leap_year(d.year)) ++n;
    return n;
}

// ISO weekday, Monday = 1 .. Sunday = 7.
inline int iso_weekday(const Date& d) {
    // Sakamoto's method gives Sunday = 0.
    static const int t[] = {0, 3, 2, 5, 0, 3, 5, 1, 4, 6, 2, 4};
    int y = d.year;
    if (d.month < 3) y -= 1;
    const int w = (y + y / 4 - y / 100 + y / 400 + t[d.month - 1] + d.day) % 7;
    return w == 0 ? 7 : w;
}

// ISO-8601 year-week label, e.g. "2023-W41". Week 1 is the week containing
// the first Thursday of the year; dates near year boundaries may belong to
// the adjacent ISO year.
inline std::string iso_week(const Date& d) {
    auto weeks_in_year = [](int y) {
        const int jan1 = iso_weekday({y, 1, 1});
        if (jan1 == 4) return 53;                        // Jan 1 is Thursday
        if (jan1 == 3 && is_leap_year(y)) return 53;     // Jan 1 is Wednesday, leap
        return 52;
    };
    int year = d.year;
    int week = (day_of_year(d) - iso_weekday(d) + 10) / 7;
    if (week < 1) {
        year -= 1;
        week = weeks_in_year(year);
    } else if (week > weeks_in_year(year)) {
        year += 1;
        week = 1;
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-W%02d", year, week);
    return buf;
}

inline std::size_t count_words(const std::string& body) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : body) {
        const bool ws = std::isspace(static_cast<unsigned char>(c));
        if (!ws && !in_word) ++n;
        in_word = !ws;
    }
    return n;
}

struct Article {
    std::string id;
    std::string source;
    std::string url;
    std::string title;
    std::string body;
    std::optional<Date> published_at;
    std::size_t word_count = 0;  // whitespace-separated tokens in body
};

struct Corpus {
    std::vector<Article> articles;  // insertion order is the iteration order
    std::string provenance;

    std::size_t size() const { return articles.size(); }
    bool empty() const { return articles.empty(); }
};

struct LoadIssue {
    std::size_t line = 0;  // 1-based
    std::string message;
};

struct LoadResult {
    Corpus corpus;
    std::vector<LoadIssue> issues;  // record-level problems; affected lines skipped
};

// Loads a JSONL corpus file. Malformed or incomplete lines are collected as
// issues and skipped; an unreadable file is fatal.
inline LoadResult load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);

    LoadResult result;
    result.corpus.provenance = path;
    std::unordered_map<std::string, std::size_t> first_line_of_id;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;

        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            result.issues.push_back({line_no, std::string("invalid JSON: ") + e.what()});
            continue;
        }
        if (!obj.is_object()) {
            result.issues.push_back({line_no, "line is not a JSON object"});
            continue;
        }

        bool ok = true;
        for (const char* key : {"id", "source", "body"}) {
            if (!obj.contains(key) || !obj[key].is_string()) {
                result.issues.push_back({line_no, std::string("missing or non-string key \"") + key + "\""});
                ok = false;
            }
        }
        if (!ok) continue;

        Article a;
        a.id = obj["id"].get<std::string>();
        a.source = obj["source"].get<std::string>();
        a.body = obj["body"].get<std::string>();
        if (obj.contains("url") && obj["url"].is_string()) a.url = obj["url"].get<std::string>();
        if (obj.contains("title") && obj["title"].is_string()) a.title = obj["title"].get<std::string>();
        if (obj.contains("published_at") && obj["published_at"].is_string()) {
            a.published_at = parse_date(obj["published_at"].get<std::string>());
            if (!a.published_at) {
                result.issues.push_back({line_no, "unparseable published_at \"" +
                                                      obj["published_at"].get<std::string>() + "\""});
                continue;
            }
        }
        a.word_count = count_words(a.body);

        auto [it, inserted] = first_line_of_id.try_emplace(a.id, line_no);
        if (!inserted) {
            std::ostringstream msg;
            msg << "duplicate id \"" << a.id << "\" on lines " << it->second << " and " << line_no;
            result.issues.push_back({line_no, msg.str()});
            continue;
        }
        result.corpus.articles.push_back(std::move(a));
    }
    return result;
}

// Keeps articles whose title or body contains at least one keyword,
// case-insensitive substring match. Order is preserved.
inline Corpus filter_by_keywords(const Corpus& corpus, const std::vector<std::string>& keywords) {
    if (keywords.empty()) throw std::invalid_argument("filter_by_keywords: keyword list is empty");
    std::vector<std::string> lowered;
    lowered.reserve(keywords.size());
    for (const auto& k : keywords) {
        if (k.empty()) throw std::invalid_argument("filter_by_keywords: empty keyword string");
        std::string lk = k;
        std::transform(lk.begin(), lk.end(), lk.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        lowered.push_back(std::move(lk));
    }

    auto to_lower = [](const std::string& s) {
        std::string t = s;
        std::transform(t.begin(), t.end(), t.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        return t;
    };

    Corpus out;
    out.provenance = corpus.provenance;
    for (const auto& a : corpus.articles) {
        const std::string haystack = to_lower(a.title) + "\n" + to_lower(a.body);
        for (const auto& k : lowered) {
            if (haystack.find(k) != std::string::npos) {
                out.articles.push_back(a);
                break;
            }
        }
    }
    return out;
}

// (iso_week, source) → article count. When group_by_source is false the
// source component is the empty string. Counts always sum to corpus size.
inline std::map<std::pair<std::string, std::string>, std::size_t> weekly_counts(
    const Corpus& corpus, bool group_by_source) {
    std::map<std::pair<std::string, std::string>, std::size_t> counts;
    for (const auto& a : corpus.articles) {
        if (!a.published_at)
            throw std::invalid_argument("weekly_counts: article \"" + a.id + "\" has no published_at");
        const std::string week = iso_week(*a.published_at);
        counts[{week, group_by_source ? a.source : std::string()}] += 1;
    }
    return counts;
}

}  // namespace narramap
