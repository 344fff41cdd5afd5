#pragma once

#include <string>
#include <vector>

#include "ccopt/patch/blocks.hpp"
#include "ccopt/patch/source_tree.hpp"

namespace ccopt::patch {

struct AppliedEdit {
    int block_index;
    std::string path;
    size_t span_begin;
    size_t span_end;  // span replaced (pre-edit offsets in that file)
};

struct RejectedBlock {
    int block_index;
    std::string reason;  // "NotFound", "Ambiguous", ...
};

struct PatchOutcome {
    SourceTree tree;
    std::vector<AppliedEdit> applied;
    std::vector<RejectedBlock> rejected;
};

// Applies blocks in order; later blocks see earlier edits. A block whose
// target cannot be located anywhere in the tree is rejected, never fatal.
PatchOutcome apply_patch(const SourceTree& tree, const std::vector<UpdateBlock>& blocks);

}  // namespace ccopt::patch
