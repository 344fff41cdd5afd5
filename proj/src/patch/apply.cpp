#include "ccopt/patch/apply.hpp"

#include "ccopt/patch/scan.hpp"

namespace ccopt::patch {

namespace {

// Body text inserted for a struct member: one level of indentation,
// trailing newline guaranteed.
std::string indent_member(const std::string& body) {
    std::string out;
    size_t pos = 0;
    while (pos < body.size()) {
        size_t nl = body.find('\n', pos);
        std::string line = body.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        if (!line.empty()) {
            out += "    " + line;
        }
        out += '\n';
        pos = (nl == std::string::npos) ? body.size() : nl + 1;
    }
    if (out.empty() || out.back() != '\n') out += '\n';
    return out;
}

std::string trimmed(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

PatchOutcome apply_patch(const SourceTree& tree, const std::vector<UpdateBlock>& blocks) {
    PatchOutcome outcome;
    outcome.tree = tree;
    for (size_t bi = 0; bi < blocks.size(); ++bi) {
        const UpdateBlock& block = blocks[bi];
        int idx = static_cast<int>(bi);
        bool applied = false;
        bool ambiguous = false;
        for (auto& file : outcome.tree.files()) {
            switch (block.kind) {
                case BlockKind::FunctionRewrite: {
                    LocateResult loc = locate_function(file.text, block.target_name);
                    if (loc.status == LocateStatus::Ambiguous) { ambiguous = true; break; }
                    if (loc.status != LocateStatus::Found) break;
                    std::string body = trimmed(block.body);
                    file.text = file.text.substr(0, loc.span.begin) + body +
                                file.text.substr(loc.span.end);
                    outcome.applied.push_back({idx, file.path, loc.span.begin, loc.span.end});
                    applied = true;
                    break;
                }
                case BlockKind::VariableRewrite: {
                    LocateResult loc = locate_variable(file.text, block.target_name);
                    if (loc.status == LocateStatus::Ambiguous) { ambiguous = true; break; }
                    if (loc.status != LocateStatus::Found) break;
                    std::string body = trimmed(block.body);
                    file.text = file.text.substr(0, loc.span.begin) + body +
                                file.text.substr(loc.span.end);
                    outcome.applied.push_back({idx, file.path, loc.span.begin, loc.span.end});
                    applied = true;
                    break;
                }
                case BlockKind::StructMemberAdd: {
                    auto close = locate_struct_close(file.text, block.target_name);
                    if (!close) break;
                    std::string ins = indent_member(trimmed(block.body));
                    file.text = file.text.substr(0, *close) + ins + file.text.substr(*close);
                    outcome.applied.push_back({idx, file.path, *close, *close});
                    applied = true;
                    break;
                }
            }
            if (applied || ambiguous) break;
        }
        if (ambiguous) {
            outcome.rejected.push_back({idx, "Ambiguous"});
        } else if (!applied) {
            outcome.rejected.push_back({idx, "NotFound"});
        }
    }
    return outcome;
}

}  // namespace ccopt::patch
