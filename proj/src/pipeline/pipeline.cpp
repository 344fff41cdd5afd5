#include "ccopt/pipeline/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>

#include "ccopt/patch/scan.hpp"
#include "ccopt/rng.hpp"

namespace ccopt::pipeline {

using json = nlohmann::json;

const char* to_string(CandidateStatus s) {
    switch (s) {
        case CandidateStatus::Parsed: return "Parsed";
        case CandidateStatus::Rejected: return "Rejected";
        case CandidateStatus::Valid: return "Valid";
        case CandidateStatus::Evaluated: return "Evaluated";
    }
    return "?";
}

std::vector<std::string> MockGenerator::generate(const patch::SourceTree&, const Candidate* parent,
                                                 int n, uint64_t seed) {
    std::vector<std::string> out;
    Rng rng(mix_seed(seed, "mock-gen", parent ? fnv1a(parent->id) : 0));
    for (int i = 0; i < n; ++i) {
        if (malformed_every_ > 0 && (i + 1) % malformed_every_ == 0) {
            // header with an unclosed fence
            out.push_back("Some reasoning text.\nUPDATE FUNCTION `" + targets_[0] +
                          "`:\n```\nvoid broken(");
            continue;
        }
        const std::string& target = targets_[rng.below(targets_.size())];
        uint64_t knob = rng.below(1000);
        std::string body = "void " + target + "(void)\n{\n    int tuning = " +
                           std::to_string(knob) + ";\n    (void)tuning;\n}\n";
        out.push_back("Idea: adjust the gain constant.\n\nUPDATE FUNCTION `" + target +
                      "`:\n```c\n" + body + "```\n");
    }
    return out;
}

namespace {

Candidate process_response(const std::string& response, std::string id,
                           std::optional<std::string> parent_id,
                           const patch::SourceTree& seed_source) {
    Candidate c;
    c.id = std::move(id);
    c.parent_id = std::move(parent_id);
    patch::ParseResult parsed = patch::parse_update_blocks(response);
    c.blocks = parsed.blocks;
    if (!parsed.errors.empty()) {
        c.status = CandidateStatus::Rejected;
        c.reject_reason = "parse: " + parsed.errors.front().message;
        return c;
    }
    if (parsed.blocks.empty()) {
        c.status = CandidateStatus::Rejected;
        c.reject_reason = "no update blocks";
        return c;
    }
    patch::PatchOutcome outcome = patch::apply_patch(seed_source, parsed.blocks);
    if (!outcome.rejected.empty()) {
        c.status = CandidateStatus::Rejected;
        c.reject_reason = "apply: " + outcome.rejected.front().reason;
        return c;
    }
    auto violations = patch::validate_syntax(outcome.tree);
    if (!violations.empty()) {
        c.status = CandidateStatus::Rejected;
        c.reject_reason = "syntax: " + violations.front().message;
        return c;
    }
    c.status = CandidateStatus::Valid;
    return c;
}

}  // namespace

IterationResult run_iteration(const IterationConfig& cfg, Generator& generator,
                              const harness::EvalBackend& backend,
                              const gauss::GaussianModel& model, const std::vector<int>& subset,
                              const patch::SourceTree& seed_source,
                              const std::vector<Candidate>& parents, int round) {
    IterationResult result;
    uint64_t round_seed = mix_seed(cfg.seed, "iteration", static_cast<uint64_t>(round));

    // generate
    std::vector<std::pair<std::string, std::optional<std::string>>> raw;  // text, parent
    if (parents.empty()) {
        for (const std::string& text :
             generator.generate(seed_source, nullptr, cfg.population, round_seed))
            raw.push_back({text, std::nullopt});
    } else {
        for (const Candidate& parent : parents) {
            for (const std::string& text :
                 generator.generate(seed_source, &parent, cfg.variants_per_parent, round_seed))
                raw.push_back({text, parent.id});
        }
    }

    // parse -> patch -> validate -> evaluate
    for (size_t i = 0; i < raw.size(); ++i) {
        std::string id = "r" + std::to_string(round) + "-c" + std::to_string(i);
        Candidate c = process_response(raw[i].first, id, raw[i].second, seed_source);
        ++result.stats.generated;
        if (c.status == CandidateStatus::Valid) {
            Eigen::VectorXd observed(subset.size());
            bool ok = true;
            for (size_t s = 0; s < subset.size(); ++s) {
                auto m = backend.measure(c.id, subset[s]);
                if (!m) {
                    ok = false;
                    break;
                }
                observed(static_cast<Eigen::Index>(s)) =
                    util::compute_utility(*m, backend.baseline(subset[s]));
            }
            if (ok) {
                c.utility_estimate = gauss::estimate_mean_utility(model, subset, observed);
                c.status = CandidateStatus::Evaluated;
                ++result.stats.valid;
            } else {
                c.status = CandidateStatus::Rejected;
                c.reject_reason = "measurement failed";
            }
        }
        if (c.status == CandidateStatus::Rejected) ++result.stats.rejected;
        result.candidates.push_back(std::move(c));
    }

    // rank evaluated candidates
    std::vector<Candidate> ranked;
    for (const Candidate& c : result.candidates)
        if (c.status == CandidateStatus::Evaluated) ranked.push_back(c);
    std::stable_sort(ranked.begin(), ranked.end(), [](const Candidate& a, const Candidate& b) {
        return *a.utility_estimate > *b.utility_estimate;
    });
    int keep = std::min<int>(cfg.survivors, static_cast<int>(ranked.size()));
    result.survivors.assign(ranked.begin(), ranked.begin() + keep);
    return result;
}

namespace {

void write_iteration(const std::filesystem::path& dir, const IterationResult& result) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "candidates.jsonl");
        for (const Candidate& c : result.candidates) {
            json j{{"id", c.id},
                   {"parent", c.parent_id ? json(*c.parent_id) : json(nullptr)},
                   {"status", to_string(c.status)},
                   {"blocks", c.blocks.size()}};
            if (!c.reject_reason.empty()) j["reason"] = c.reject_reason;
            if (c.utility_estimate) j["estimate"] = *c.utility_estimate;
            os << j.dump() << '\n';
        }
    }
    {
        std::ofstream os(dir / "ranking.csv");
        os << "rank,candidate_id,estimate\n";
        os.precision(17);
        int rank = 1;
        for (const Candidate& c : result.survivors)
            os << rank++ << ',' << c.id << ',' << *c.utility_estimate << '\n';
    }
    {
        json j = json::array();
        for (const Candidate& c : result.survivors)
            j.push_back({{"id", c.id}, {"estimate", *c.utility_estimate}});
        std::ofstream os(dir / "survivors.json");
        os << j.dump(2) << '\n';
    }
}

}  // namespace

PipelineResult run_pipeline(int iterations, const IterationConfig& cfg, Generator& generator,
                            const harness::EvalBackend& backend,
                            const gauss::GaussianModel& model, const std::vector<int>& subset,
                            const patch::SourceTree& seed_source,
                            const std::optional<std::filesystem::path>& run_dir) {
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    PipelineResult result;
    std::vector<Candidate> parents;
    for (int round = 0; round < iterations; ++round) {
        IterationResult iter = run_iteration(cfg, generator, backend, model, subset, seed_source,
                                             parents, round);
        double best = iter.survivors.empty() ? 0.0 : *iter.survivors.front().utility_estimate;
        result.best_utility_per_iteration.push_back(best);
        if (run_dir) write_iteration(*run_dir / ("iter" + std::to_string(round)), iter);
        parents = iter.survivors;
        result.iterations.push_back(std::move(iter));
    }
    return result;
}

int next_iteration_index(const std::filesystem::path& run_dir) {
    int i = 0;
    while (std::filesystem::exists(run_dir / ("iter" + std::to_string(i)) / "survivors.json")) ++i;
    return i;
}

}  // namespace ccopt::pipeline
