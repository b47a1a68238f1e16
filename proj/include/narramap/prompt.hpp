#pragma once

// Actant extraction prompt. The template is a frozen contract: downstream
// caches key on the exact prompt bytes, so any change here invalidates every
// cached response.

#include <stdexcept>
#include <string>

namespace narramap {

inline constexpr const char* kActantPromptTemplate =
    R"(According to the Actantial Model by Greimas with the actant label set ["Sender", "Receiver", "Subject", "Object", "Helper", "Opponent"], the actants are defined as follows:

* Subject: The character who carries out the action and desires the Object.
* Object: The character or thing that is desired.
* Sender: The character who initiates the action and communicates the Object.
* Receiver: The character who receives the action or the Object.
* Helper: The character who assists the Subject in achieving its goal.
* Opponent: The character who opposes the Subject in achieving its goal.

Based on this Actantial Model and the actant label set, please recognize the actants in the given article.

Article: {{ article }}

Question: What are the main actants in the text? Provide the answer in the following JSON format: {"Actant Label": ["Actant Name"]}. If there is no corresponding actant, return the following empty list: {"Actant Label": []}.

Answer:)";

inline constexpr const char* kArticlePlaceholder = "{{ article }}";

// Substitutes the article body into the template. Everything around the body
// is emitted byte-for-byte.
inline std::string render_prompt(const std::string& article_body) {
    if (article_body.empty()) throw std::invalid_argument("render_prompt: empty article body");
    std::string prompt = kActantPromptTemplate;
    const std::size_t pos = prompt.find(kArticlePlaceholder);
    prompt.replace(pos, std::string(kArticlePlaceholder).size(), article_body);
    return prompt;
}

}  // namespace narramap
