#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ccopt/gauss/model.hpp"
#include "ccopt/harness/backend.hpp"
#include "ccopt/utility/utility.hpp"

namespace ccopt::harness {

enum class Selector { Greedy, Random, BwVar };

const char* to_string(Selector s);

struct ExperimentPlan {
    int pilot_size = 100;   // L
    int subset_size = 20;   // K
    int recall_cut = 20;    // R
    int top_n = 10;         // ground-truth cut
    uint64_t seed = 0;
    Selector selector = Selector::Greedy;
    double ridge_scale = 1e-8;
    // per-condition bandwidth variance, required for Selector::BwVar
    std::vector<double> bw_variance;
};

// Dense utility grid over every (candidate, condition); a failed cell masks
// the whole candidate row. Cells run in parallel when the backend allows it;
// results land in deterministic (row, column) order either way.
util::UtilityMatrix evaluate_full(const EvalBackend& backend,
                                  const std::vector<std::string>& candidates);

struct RankedCandidate {
    std::string id;
    double estimate;
};

struct ProtocolResult {
    std::vector<int> pilot_indices;            // into the candidate list
    gauss::GaussianModel model;
    std::vector<int> subset;                   // selected condition indices, pick/sort order
    std::vector<double> subset_trajectory;     // greedy only; empty otherwise
    std::vector<RankedCandidate> ranking;      // remainder, estimate descending
    std::vector<std::string> invalid;          // candidates dropped on failed cells
    long evaluations_used = 0;
};

// The efficient-evaluation protocol: pilot L fully, fit, pick S, evaluate the
// remainder on S only, rank by estimated mean utility.
ProtocolResult run_efficient_protocol(const EvalBackend& backend,
                                      const std::vector<std::string>& candidates,
                                      const ExperimentPlan& plan);

// |true top_n  ∩  estimated top R| / top_n, over the same candidate set.
double recall_at(const std::vector<std::string>& estimated_ranking,
                 const std::vector<std::string>& true_ranking, int top_n, int r);

// Uniform K-subset of [0, M) without replacement, sorted.
std::vector<int> select_baseline_random(int m, int k, uint64_t seed);

// Top-K condition indices by population bandwidth variance, ties by index.
std::vector<int> select_baseline_bwvar(const std::vector<std::vector<double>>& bw_series, int k);
std::vector<int> select_baseline_bwvar_from_variance(const std::vector<double>& variance, int k);

// 1 - (L*M + (N-L)*K + M*R) / (M*N).
double eval_savings(int m, int n, int l, int k, int r);

struct RecallReport {
    ExperimentPlan plan;
    std::map<int, double> recall_at_r;  // R' -> recall, R' = top_n..R
    long evaluations_used = 0;
    double savings = 0.0;

    std::string to_json() const;
};

}  // namespace ccopt::harness
