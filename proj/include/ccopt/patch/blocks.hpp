#pragma once

#include <string>
#include <vector>

namespace ccopt::patch {

enum class BlockKind { FunctionRewrite, VariableRewrite, StructMemberAdd };

const char* to_string(BlockKind k);

// One parsed patch directive: a header line naming the target plus a fenced
// code body.
struct UpdateBlock {
    BlockKind kind;
    std::string target_name;  // identifier; never empty
    std::string body;         // raw code; never empty after trimming
};

struct ParseError {
    int block_index;      // position among headers found, 0-based
    std::string message;  // "missing fence", "unclosed fence", ...
};

struct ParseResult {
    std::vector<UpdateBlock> blocks;  // well-formed blocks, in document order
    std::vector<ParseError> errors;   // malformed headers; never aborts the scan
};

// Scans arbitrary response text for update-block headers of the form
//   UPDATE FUNCTION `Name`:
//   UPDATE VARIABLE `Name`:
//   ADD MEMBER TO `Name`:
// each followed by a ``` fenced body (an optional language tag after the
// opening fence is tolerated, as is a missing colon after the header).
// Prose outside blocks is ignored. Total: never throws on any input.
ParseResult parse_update_blocks(const std::string& text);

}  // namespace ccopt::patch
