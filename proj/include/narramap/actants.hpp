#pragma once

// The six actant roles and the per-article actantial model. The canonical
// role order below is fixed: embedding blocks are concatenated and role codes
// are rendered in exactly this order everywhere.

#include <array>
#include <cctype>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace narramap {

enum class ActantRole { Subject = 0, Object, Sender, Receiver, Helper, Opponent };

inline constexpr std::size_t kNumRoles = 6;

inline constexpr std::array<ActantRole, kNumRoles> kRoleOrder = {
    ActantRole::Subject, ActantRole::Object,  ActantRole::Sender,
    ActantRole::Receiver, ActantRole::Helper, ActantRole::Opponent};

inline const char* role_name(ActantRole r) {
    switch (r) {
        case ActantRole::Subject: return "Subject";
        case ActantRole::Object: return "Object";
        case ActantRole::Sender: return "Sender";
        case ActantRole::Receiver: return "Receiver";
        case ActantRole::Helper: return "Helper";
        case ActantRole::Opponent: return "Opponent";
    }
    return "";
}

// Two-letter code used in cluster labels, e.g. "Su" in "Israel (SuSe)".
inline const char* role_code(ActantRole r) {
    switch (r) {
        case ActantRole::Subject: return "Su";
        case ActantRole::Object: return "Ob";
        case ActantRole::Sender: return "Se";
        case ActantRole::Receiver: return "Re";
        case ActantRole::Helper: return "He";
        case ActantRole::Opponent: return "Op";
    }
    return "";
}

inline std::optional<ActantRole> role_from_name(const std::string& name) {
    std::string lower;
    lower.reserve(name.size());
    for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "subject") return ActantRole::Subject;
    if (lower == "object") return ActantRole::Object;
    if (lower == "sender") return ActantRole::Sender;
    if (lower == "receiver") return ActantRole::Receiver;
    if (lower == "helper") return ActantRole::Helper;
    if (lower == "opponent") return ActantRole::Opponent;
    return std::nullopt;
}

// The three relation axes of the model. Descriptive metadata only; no
// computation depends on it.
enum class RelationAxis { Desire, Communication, Power };

inline std::vector<ActantRole> axis_roles(RelationAxis axis) {
    switch (axis) {
        case RelationAxis::Desire:
            return {ActantRole::Subject, ActantRole::Object};
        case RelationAxis::Communication:
            return {ActantRole::Sender, ActantRole::Object, ActantRole::Receiver};
        case RelationAxis::Power:
            return {ActantRole::Helper, ActantRole::Opponent, ActantRole::Subject};
    }
    return {};
}

// Trim and collapse internal whitespace runs to single spaces.
inline std::string normalize_actor_surface(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

// Case-folded form used when comparing or counting actors.
inline std::string normalize_actor_key(const std::string& s) {
    std::string t = normalize_actor_surface(s);
    for (char& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return t;
}

struct ActantialModel {
    // actors[role] holds trimmed surface forms in extraction order; the
    // primary actor of a role is actors[role].front() when non-empty.
    std::array<std::vector<std::string>, kNumRoles> actors;

    const std::vector<std::string>& actors_for(ActantRole r) const {
        return actors[static_cast<std::size_t>(r)];
    }
    std::vector<std::string>& actors_for(ActantRole r) {
        return actors[static_cast<std::size_t>(r)];
    }

    std::optional<std::string> primary(ActantRole r) const {
        const auto& v = actors_for(r);
        if (v.empty()) return std::nullopt;
        return v.front();
    }

    bool missing(ActantRole r) const { return actors_for(r).empty(); }
};

struct RolePair {
    ActantRole a;  // a < b in canonical order
    ActantRole b;

    bool operator==(const RolePair&) const = default;
    auto operator<=>(const RolePair&) const = default;
};

inline RolePair make_role_pair(ActantRole x, ActantRole y) {
    if (x == y) throw std::invalid_argument("role pair must use two distinct roles");
    if (static_cast<int>(x) > static_cast<int>(y)) std::swap(x, y);
    return {x, y};
}

inline std::vector<RolePair> all_role_pairs() {
    std::vector<RolePair> pairs;
    for (std::size_t i = 0; i < kNumRoles; ++i)
        for (std::size_t j = i + 1; j < kNumRoles; ++j)
            pairs.push_back({kRoleOrder[i], kRoleOrder[j]});
    return pairs;  // C(6,2) = 15
}

// A syncretism is one actor occupying two roles at once. Detection compares
// primary actors under the normalized key (case fold, trim, collapse).
inline std::set<RolePair> detect_syncretisms(const ActantialModel& model) {
    std::set<RolePair> pairs;
    for (std::size_t i = 0; i < kNumRoles; ++i) {
        const auto pi = model.primary(kRoleOrder[i]);
        if (!pi) continue;
        const std::string ki = normalize_actor_key(*pi);
        for (std::size_t j = i + 1; j < kNumRoles; ++j) {
            const auto pj = model.primary(kRoleOrder[j]);
            if (!pj) continue;
            if (ki == normalize_actor_key(*pj)) pairs.insert({kRoleOrder[i], kRoleOrder[j]});
        }
    }
    return pairs;
}

}  // namespace narramap
