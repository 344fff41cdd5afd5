#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ccopt/gauss/model.hpp"
#include "ccopt/harness/backend.hpp"
#include "ccopt/patch/apply.hpp"
#include "ccopt/patch/blocks.hpp"
#include "ccopt/patch/source_tree.hpp"

namespace ccopt::pipeline {

enum class CandidateStatus { Parsed, Rejected, Valid, Evaluated };

const char* to_string(CandidateStatus s);

struct Candidate {
    std::string id;
    std::optional<std::string> parent_id;
    std::vector<patch::UpdateBlock> blocks;
    CandidateStatus status = CandidateStatus::Parsed;
    std::string reject_reason;
    std::optional<double> utility_estimate;
};

// Candidate generator contract. The mock implementation is deterministic
// under a fixed seed; the HTTP-backed generator is never exercised by tests.
class Generator {
public:
    virtual ~Generator() = default;
    virtual std::vector<std::string> generate(const patch::SourceTree& seed_source,
                                              const Candidate* parent, int n,
                                              uint64_t seed) = 0;
};

// Emits update-block responses rewriting functions found in the seed tree
// with small deterministic constant tweaks. A fixed fraction of responses is
// intentionally malformed to exercise the rejection path.
class MockGenerator : public Generator {
public:
    explicit MockGenerator(std::vector<std::string> target_functions, int malformed_every = 0)
        : targets_(std::move(target_functions)), malformed_every_(malformed_every) {}

    std::vector<std::string> generate(const patch::SourceTree& seed_source,
                                      const Candidate* parent, int n, uint64_t seed) override;

private:
    std::vector<std::string> targets_;
    int malformed_every_;  // every k-th response malformed; 0 disables
};

struct IterationConfig {
    int population = 100;          // round 0 generation count
    int variants_per_parent = 10;  // later rounds
    int survivors = 10;
    uint64_t seed = 0;
};

struct IterationStats {
    int generated = 0;
    int valid = 0;
    int rejected = 0;
};

struct IterationResult {
    std::vector<Candidate> candidates;  // all, document order
    std::vector<Candidate> survivors;   // estimate-descending, top `survivors`
    IterationStats stats;
};

// One generate -> parse -> patch -> validate -> evaluate-on-subset -> rank
// round. Parents empty means round 0.
IterationResult run_iteration(const IterationConfig& cfg, Generator& generator,
                              const harness::EvalBackend& backend,
                              const gauss::GaussianModel& model, const std::vector<int>& subset,
                              const patch::SourceTree& seed_source,
                              const std::vector<Candidate>& parents, int round);

struct PipelineResult {
    std::vector<double> best_utility_per_iteration;
    std::vector<IterationResult> iterations;
};

// Chains run_iteration; model and subset are fit once and reused across
// rounds. When `run_dir` is set, writes
// runs/<name>/iter<i>/{candidates.jsonl, ranking.csv, survivors.json}.
PipelineResult run_pipeline(int iterations, const IterationConfig& cfg, Generator& generator,
                            const harness::EvalBackend& backend,
                            const gauss::GaussianModel& model, const std::vector<int>& subset,
                            const patch::SourceTree& seed_source,
                            const std::optional<std::filesystem::path>& run_dir = std::nullopt);

// Index of the first iteration directory missing under `run_dir`, for resume.
int next_iteration_index(const std::filesystem::path& run_dir);

}  // namespace ccopt::pipeline
