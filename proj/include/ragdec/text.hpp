#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace ragdec {

/// Tokenization used by both the retriever and the synthetic backend:
/// lowercase, split on any non-alphanumeric byte, drop empties.
/// No stemming, no stop words.
inline std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : s) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

/// Canonical answer form: lowercase, single spaces, no leading/trailing
/// whitespace. Exact-match scoring compares these.
inline std::string normalize_answer(std::string_view s) {
    std::string out;
    bool in_space = true;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            in_space = true;
        } else {
            if (in_space && !out.empty()) out.push_back(' ');
            out.push_back(static_cast<char>(std::tolower(c)));
            in_space = false;
        }
    }
    return out;
}

inline std::vector<std::string_view> split_lines(std::string_view s) {
    std::vector<std::string_view> lines;
    size_t start = 0;
    while (start <= s.size()) {
        size_t nl = s.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(s.substr(start));
            break;
        }
        lines.push_back(s.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

}  // namespace ragdec
