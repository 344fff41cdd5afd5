#include "ccopt/patch/scan.hpp"

#include <cctype>

namespace ccopt::patch {

namespace {

enum class LexState { Normal, LineComment, BlockComment, String, Char };

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

CodeMask CodeMask::build(const std::string& text) {
    CodeMask mask;
    mask.text = &text;
    mask.is_code.assign(text.size(), false);
    LexState st = LexState::Normal;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        char n = (i + 1 < text.size()) ? text[i + 1] : '\0';
        switch (st) {
            case LexState::Normal:
                if (c == '/' && n == '/') {
                    st = LexState::LineComment;
                } else if (c == '/' && n == '*') {
                    st = LexState::BlockComment;
                    ++i;
                } else if (c == '"') {
                    st = LexState::String;
                } else if (c == '\'') {
                    st = LexState::Char;
                } else {
                    mask.is_code[i] = true;
                }
                break;
            case LexState::LineComment:
                if (c == '\n') {
                    st = LexState::Normal;
                    mask.is_code[i] = true;  // the newline itself is code
                }
                break;
            case LexState::BlockComment:
                if (c == '*' && n == '/') {
                    st = LexState::Normal;
                    ++i;
                }
                break;
            case LexState::String:
                if (c == '\\') {
                    ++i;
                } else if (c == '"') {
                    st = LexState::Normal;
                }
                break;
            case LexState::Char:
                if (c == '\\') {
                    ++i;
                } else if (c == '\'') {
                    st = LexState::Normal;
                }
                break;
        }
    }
    return mask;
}

namespace {

// Terminal lexer state for a whole file; used by validate_syntax to flag
// unterminated constructs.
LexState final_state(const std::string& text) {
    LexState st = LexState::Normal;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        char n = (i + 1 < text.size()) ? text[i + 1] : '\0';
        switch (st) {
            case LexState::Normal:
                if (c == '/' && n == '/') st = LexState::LineComment;
                else if (c == '/' && n == '*') { st = LexState::BlockComment; ++i; }
                else if (c == '"') st = LexState::String;
                else if (c == '\'') st = LexState::Char;
                break;
            case LexState::LineComment:
                if (c == '\n') st = LexState::Normal;
                break;
            case LexState::BlockComment:
                if (c == '*' && n == '/') { st = LexState::Normal; ++i; }
                break;
            case LexState::String:
                if (c == '\\') ++i;
                else if (c == '"') st = LexState::Normal;
                break;
            case LexState::Char:
                if (c == '\\') ++i;
                else if (c == '\'') st = LexState::Normal;
                break;
        }
    }
    return st;
}

// Brace depth before each byte, counting only code braces.
std::vector<int> brace_depth(const CodeMask& mask) {
    const std::string& t = *mask.text;
    std::vector<int> depth(t.size() + 1, 0);
    int d = 0;
    for (size_t i = 0; i < t.size(); ++i) {
        depth[i] = d;
        if (!mask.is_code[i]) continue;
        if (t[i] == '{') ++d;
        else if (t[i] == '}') d = d > 0 ? d - 1 : 0;
    }
    depth[t.size()] = d;
    return depth;
}

// Whole-identifier occurrences of `name` in code regions.
std::vector<size_t> find_identifier(const CodeMask& mask, const std::string& name) {
    const std::string& t = *mask.text;
    std::vector<size_t> out;
    size_t pos = 0;
    while ((pos = t.find(name, pos)) != std::string::npos) {
        bool code = true;
        for (size_t i = pos; i < pos + name.size(); ++i)
            if (!mask.is_code[i]) { code = false; break; }
        bool left_ok = pos == 0 || !ident_char(t[pos - 1]);
        bool right_ok = pos + name.size() >= t.size() || !ident_char(t[pos + name.size()]);
        if (code && left_ok && right_ok) out.push_back(pos);
        pos += name.size();
    }
    return out;
}

size_t skip_ws_and_comments(const CodeMask& mask, size_t pos) {
    const std::string& t = *mask.text;
    while (pos < t.size()) {
        if (!mask.is_code[pos]) { ++pos; continue; }
        if (std::isspace(static_cast<unsigned char>(t[pos]))) { ++pos; continue; }
        break;
    }
    return pos;
}

// Matching close bracket for the open bracket at `pos` (code byte). Returns
// npos if unbalanced.
size_t match_bracket(const CodeMask& mask, size_t pos, char open, char close) {
    const std::string& t = *mask.text;
    int d = 0;
    for (size_t i = pos; i < t.size(); ++i) {
        if (!mask.is_code[i]) continue;
        if (t[i] == open) ++d;
        else if (t[i] == close) {
            if (--d == 0) return i;
        }
    }
    return std::string::npos;
}

// Start of the statement/signature containing byte `pos`: just after the
// previous code-level `;`, `}`, `{`, or the end of a preprocessor line, then
// forward past whitespace.
size_t statement_start(const CodeMask& mask, size_t pos) {
    const std::string& t = *mask.text;
    size_t boundary = 0;
    for (size_t i = pos; i-- > 0;) {
        if (!mask.is_code[i]) continue;
        char c = t[i];
        if (c == ';' || c == '}' || c == '{') {
            boundary = i + 1;
            break;
        }
        if (c == '\n') {
            // boundary if the line ending here is a preprocessor line
            size_t ls = t.rfind('\n', i == 0 ? 0 : i - 1);
            ls = (ls == std::string::npos) ? 0 : ls + 1;
            size_t fc = ls;
            while (fc < i && std::isspace(static_cast<unsigned char>(t[fc]))) ++fc;
            if (fc < i && t[fc] == '#') {
                boundary = i + 1;
                break;
            }
        }
    }
    while (boundary < pos && std::isspace(static_cast<unsigned char>(t[boundary]))) ++boundary;
    return boundary;
}

}  // namespace

LocateResult locate_function(const std::string& file_text, const std::string& name) {
    CodeMask mask = CodeMask::build(file_text);
    std::vector<int> depth = brace_depth(mask);
    std::vector<Span> defs;
    for (size_t pos : find_identifier(mask, name)) {
        if (depth[pos] != 0) continue;
        size_t after = skip_ws_and_comments(mask, pos + name.size());
        if (after >= file_text.size() || file_text[after] != '(') continue;
        size_t close_paren = match_bracket(mask, after, '(', ')');
        if (close_paren == std::string::npos) continue;
        size_t next = skip_ws_and_comments(mask, close_paren + 1);
        if (next >= file_text.size()) continue;
        if (file_text[next] == ';') continue;  // declaration
        if (file_text[next] != '{') continue;
        size_t close_brace = match_bracket(mask, next, '{', '}');
        if (close_brace == std::string::npos) continue;
        defs.push_back({statement_start(mask, pos), close_brace + 1});
    }
    if (defs.empty()) return {LocateStatus::NotFound, {}};
    if (defs.size() > 1) return {LocateStatus::Ambiguous, {}};
    return {LocateStatus::Found, defs[0]};
}

LocateResult locate_variable(const std::string& file_text, const std::string& name) {
    CodeMask mask = CodeMask::build(file_text);
    std::vector<int> depth = brace_depth(mask);
    std::vector<Span> defs;
    for (size_t pos : find_identifier(mask, name)) {
        if (depth[pos] != 0) continue;
        size_t after = skip_ws_and_comments(mask, pos + name.size());
        if (after < file_text.size() && file_text[after] == '(') continue;  // function
        // statement end: next `;` with bracket counters back at zero
        size_t begin = statement_start(mask, pos);
        int braces = 0, parens = 0, squares = 0;
        size_t end = std::string::npos;
        for (size_t i = begin; i < file_text.size(); ++i) {
            if (!mask.is_code[i]) continue;
            char c = file_text[i];
            if (c == '{') ++braces;
            else if (c == '}') --braces;
            else if (c == '(') ++parens;
            else if (c == ')') --parens;
            else if (c == '[') ++squares;
            else if (c == ']') --squares;
            else if (c == ';' && braces == 0 && parens == 0 && squares == 0) {
                end = i + 1;
                break;
            }
        }
        if (end == std::string::npos) continue;
        if (pos >= end) continue;  // name was not inside this statement
        defs.push_back({begin, end});
    }
    if (defs.empty()) return {LocateStatus::NotFound, {}};
    // the same statement can surface once per mention; dedupe identical spans
    std::vector<Span> unique;
    for (const Span& s : defs) {
        bool seen = false;
        for (const Span& u : unique)
            if (u.begin == s.begin && u.end == s.end) seen = true;
        if (!seen) unique.push_back(s);
    }
    if (unique.size() > 1) return {LocateStatus::Ambiguous, {}};
    return {LocateStatus::Found, unique[0]};
}

std::optional<size_t> locate_struct_close(const std::string& file_text, const std::string& name) {
    CodeMask mask = CodeMask::build(file_text);
    // pattern A: struct Name { ... }
    for (size_t pos : find_identifier(mask, name)) {
        // preceded by `struct` keyword?
        size_t i = pos;
        while (i > 0 && std::isspace(static_cast<unsigned char>(file_text[i - 1]))) --i;
        if (i >= 6 && file_text.compare(i - 6, 6, "struct") == 0 &&
            (i == 6 || !ident_char(file_text[i - 7]))) {
            size_t brace = skip_ws_and_comments(mask, pos + name.size());
            if (brace < file_text.size() && file_text[brace] == '{') {
                size_t close = match_bracket(mask, brace, '{', '}');
                if (close != std::string::npos) return close;
            }
        }
    }
    // pattern B: typedef struct { ... } Name;
    for (size_t pos : find_identifier(mask, name)) {
        size_t after = skip_ws_and_comments(mask, pos + name.size());
        if (after >= file_text.size() || file_text[after] != ';') continue;
        size_t i = pos;
        while (i > 0) {
            --i;
            if (!mask.is_code[i]) continue;
            if (std::isspace(static_cast<unsigned char>(file_text[i]))) continue;
            if (file_text[i] == '}') return i;
            break;
        }
    }
    return std::nullopt;
}

std::vector<SyntaxViolation> validate_syntax(const SourceTree& tree) {
    std::vector<SyntaxViolation> out;
    for (const auto& f : tree.files()) {
        LexState end_state = final_state(f.text);
        if (end_state == LexState::BlockComment) {
            out.push_back({f.path, 1, "unterminated block comment"});
            continue;
        }
        if (end_state == LexState::String || end_state == LexState::Char) {
            out.push_back({f.path, 1, "unterminated literal"});
            continue;
        }
        CodeMask mask = CodeMask::build(f.text);
        std::vector<std::pair<char, int>> stack;  // open char, line
        int line = 1;
        bool bad = false;
        for (size_t i = 0; i < f.text.size() && !bad; ++i) {
            if (f.text[i] == '\n') ++line;
            if (!mask.is_code[i]) continue;
            char c = f.text[i];
            if (c == '{' || c == '(' || c == '[') {
                stack.push_back({c, line});
            } else if (c == '}' || c == ')' || c == ']') {
                char want = c == '}' ? '{' : (c == ')' ? '(' : '[');
                if (stack.empty() || stack.back().first != want) {
                    out.push_back({f.path, line, std::string("unmatched '") + c + "'"});
                    bad = true;
                } else {
                    stack.pop_back();
                }
            }
        }
        if (!bad) {
            for (const auto& [c, l] : stack)
                out.push_back({f.path, l, std::string("unclosed '") + c + "'"});
        }
    }
    return out;
}

}  // namespace ccopt::patch
