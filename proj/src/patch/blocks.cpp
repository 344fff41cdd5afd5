#include "ccopt/patch/blocks.hpp"

#include <cctype>
#include <optional>
#include <string_view>

namespace ccopt::patch {

const char* to_string(BlockKind k) {
    switch (k) {
        case BlockKind::FunctionRewrite: return "FunctionRewrite";
        case BlockKind::VariableRewrite: return "VariableRewrite";
        case BlockKind::StructMemberAdd: return "StructMemberAdd";
    }
    return "?";
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    }
    return true;
}

struct Header {
    BlockKind kind;
    std::string name;
};

// Matches `UPDATE FUNCTION \`Name\`` etc., backticks required, trailing
// colon optional. Returns nullopt for anything else.
std::optional<Header> match_header(std::string_view line) {
    std::string_view t = trim(line);
    BlockKind kind;
    if (t.starts_with("UPDATE FUNCTION")) {
        kind = BlockKind::FunctionRewrite;
        t.remove_prefix(15);
    } else if (t.starts_with("UPDATE VARIABLE")) {
        kind = BlockKind::VariableRewrite;
        t.remove_prefix(15);
    } else if (t.starts_with("ADD MEMBER TO")) {
        kind = BlockKind::StructMemberAdd;
        t.remove_prefix(13);
    } else {
        return std::nullopt;
    }
    t = trim(t);
    if (t.size() < 2 || t.front() != '`') return std::nullopt;
    size_t close = t.find('`', 1);
    if (close == std::string_view::npos) return std::nullopt;
    std::string_view name = t.substr(1, close - 1);
    std::string_view rest = trim(t.substr(close + 1));
    if (!rest.empty() && rest != ":") return std::nullopt;
    if (!is_identifier(name)) return std::nullopt;
    return Header{kind, std::string(name)};
}

bool is_fence_open(std::string_view line) {
    std::string_view t = trim(line);
    if (!t.starts_with("```")) return false;
    // optional language tag, e.g. ```c
    return is_identifier(trim(t.substr(3))) || trim(t.substr(3)).empty();
}

bool is_fence_close(std::string_view line) { return trim(line) == "```"; }

}  // namespace

ParseResult parse_update_blocks(const std::string& text) {
    ParseResult result;
    // split into lines, remembering that the body must preserve bytes
    std::vector<std::string_view> lines;
    {
        size_t pos = 0;
        while (pos <= text.size()) {
            size_t nl = text.find('\n', pos);
            if (nl == std::string::npos) {
                lines.emplace_back(text.data() + pos, text.size() - pos);
                break;
            }
            lines.emplace_back(text.data() + pos, nl - pos);
            pos = nl + 1;
        }
    }

    int header_index = 0;
    for (size_t i = 0; i < lines.size(); ++i) {
        auto header = match_header(lines[i]);
        if (!header) continue;
        int idx = header_index++;

        // find the opening fence; blank lines in between are tolerated
        size_t j = i + 1;
        while (j < lines.size() && trim(lines[j]).empty()) ++j;
        if (j >= lines.size() || !is_fence_open(lines[j])) {
            result.errors.push_back({idx, "missing fence after header"});
            continue;
        }
        size_t body_start = j + 1;
        size_t k = body_start;
        while (k < lines.size() && !is_fence_close(lines[k])) ++k;
        if (k >= lines.size()) {
            result.errors.push_back({idx, "unclosed fence"});
            i = lines.size();
            continue;
        }
        std::string body;
        for (size_t b = body_start; b < k; ++b) {
            body.append(lines[b]);
            body.push_back('\n');
        }
        if (trim(body).empty()) {
            result.errors.push_back({idx, "empty body"});
        } else {
            result.blocks.push_back({header->kind, header->name, body});
        }
        i = k;  // resume after the closing fence
    }
    return result;
}

}  // namespace ccopt::patch
