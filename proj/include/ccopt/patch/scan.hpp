#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ccopt/patch/source_tree.hpp"

namespace ccopt::patch {

// Lexer-lite view of C-like source: every byte classified as code or
// non-code (comment, string literal, char literal). No preprocessing,
// no grammar; enough to find function spans and check brace balance.
struct CodeMask {
    const std::string* text;
    std::vector<bool> is_code;  // per byte

    static CodeMask build(const std::string& text);
};

struct Span {
    size_t begin = 0;  // byte offset, inclusive
    size_t end = 0;    // byte offset, exclusive
};

enum class LocateStatus { Found, NotFound, Ambiguous };

struct LocateResult {
    LocateStatus status;
    Span span;  // valid only when Found
};

// Span of the definition of function `name`: from the start of its signature
// (scanning back from `name(` at depth 0 to the previous `;`, `}`, `{` or
// preprocessor line) through the matching closing brace. Declarations
// (signature ending in `;`) are skipped. Two definitions -> Ambiguous.
LocateResult locate_function(const std::string& file_text, const std::string& name);

// Span of the file-scope definition statement of `name`, from declaration
// start through the terminating `;`.
LocateResult locate_variable(const std::string& file_text, const std::string& name);

// Insertion point just before the closing `}` of `struct Name { ... }` or
// `typedef struct { ... } Name;`. Returns offset of the `}` byte.
std::optional<size_t> locate_struct_close(const std::string& file_text, const std::string& name);

struct SyntaxViolation {
    std::string path;
    int line;  // 1-based
    std::string message;
};

// Per-file balance check for {} () [] outside literals/comments, plus
// unterminated comment/string detection.
std::vector<SyntaxViolation> validate_syntax(const SourceTree& tree);

}  // namespace ccopt::patch
