#include "ccopt/harness/harness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "ccopt/rng.hpp"

namespace ccopt::harness {

using json = nlohmann::json;

const char* to_string(Selector s) {
    switch (s) {
        case Selector::Greedy: return "greedy";
        case Selector::Random: return "random";
        case Selector::BwVar: return "bwvar";
    }
    return "?";
}

util::UtilityMatrix evaluate_full(const EvalBackend& backend,
                                  const std::vector<std::string>& candidates) {
    const int m = backend.num_conditions();
    std::vector<std::string> cond_ids(m);
    for (int j = 0; j < m; ++j) cond_ids[j] = "c" + std::to_string(j);
    util::UtilityMatrix grid(candidates, cond_ids);

    const int n = static_cast<int>(candidates.size());
    std::vector<util::Measurement> baselines(m);
    for (int j = 0; j < m; ++j) baselines[j] = backend.baseline(j);

    // cells computed into plain buffers in parallel, committed serially in
    // (row, column) order
    std::vector<double> values(static_cast<size_t>(n) * m, 0.0);
    std::vector<char> ok(static_cast<size_t>(n) * m, 0);
    const bool parallel = backend.caps().parallel_safe;
#pragma omp parallel for collapse(2) schedule(dynamic) if (parallel)
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            auto measured = backend.measure(candidates[i], j);
            if (!measured) continue;
            size_t cell = static_cast<size_t>(i) * m + j;
            values[cell] = util::compute_utility(*measured, baselines[j]);
            ok[cell] = 1;
        }
    }
    for (int i = 0; i < n; ++i) {
        bool complete = true;
        for (int j = 0; j < m; ++j)
            if (!ok[static_cast<size_t>(i) * m + j]) complete = false;
        if (!complete) continue;  // failed cell invalidates the candidate
        for (int j = 0; j < m; ++j) grid.set(i, j, values[static_cast<size_t>(i) * m + j]);
    }
    return grid;
}

ProtocolResult run_efficient_protocol(const EvalBackend& backend,
                                      const std::vector<std::string>& candidates,
                                      const ExperimentPlan& plan) {
    const int n = static_cast<int>(candidates.size());
    const int m = backend.num_conditions();
    if (plan.pilot_size >= n) throw std::invalid_argument("L must be < N");
    if (plan.subset_size > m) throw std::invalid_argument("K must be <= M");

    ProtocolResult result;

    // step 1: pilot sample, evaluated fully
    Rng rng(mix_seed(plan.seed, "pilot-sample"));
    result.pilot_indices = rng.sample_without_replacement(n, plan.pilot_size);
    std::vector<std::string> pilot_ids;
    for (int i : result.pilot_indices) pilot_ids.push_back(candidates[i]);
    util::UtilityMatrix pilot = evaluate_full(backend, pilot_ids);
    result.evaluations_used += static_cast<long>(pilot_ids.size()) * m;

    // invalid pilot rows are dropped before the fit
    std::vector<int> good_rows;
    for (int i = 0; i < pilot.rows(); ++i) {
        if (pilot.row_complete(i)) good_rows.push_back(i);
        else result.invalid.push_back(pilot_ids[i]);
    }
    Eigen::MatrixXd x(good_rows.size(), m);
    for (size_t r = 0; r < good_rows.size(); ++r)
        for (int j = 0; j < m; ++j) x(static_cast<Eigen::Index>(r), j) = pilot.at(good_rows[r], j);
    result.model = gauss::fit_gaussian(x, plan.ridge_scale);

    // step 2: condition subset
    if (plan.subset_size == m) {
        result.subset.resize(m);
        std::iota(result.subset.begin(), result.subset.end(), 0);
    } else {
        switch (plan.selector) {
            case Selector::Greedy: {
                gauss::SubsetSelection sel = gauss::greedy_select(result.model, plan.subset_size);
                result.subset = sel.order;
                result.subset_trajectory = sel.cond_var_trajectory;
                break;
            }
            case Selector::Random:
                result.subset = select_baseline_random(m, plan.subset_size,
                                                       mix_seed(plan.seed, "random-subset"));
                break;
            case Selector::BwVar:
                if (static_cast<int>(plan.bw_variance.size()) != m)
                    throw std::invalid_argument("BwVar selector needs per-condition bw variance");
                result.subset =
                    select_baseline_bwvar_from_variance(plan.bw_variance, plan.subset_size);
                break;
        }
    }

    // steps 3-5: evaluate the remainder on S only, estimate, rank
    std::set<int> pilot_set(result.pilot_indices.begin(), result.pilot_indices.end());
    for (int i = 0; i < n; ++i) {
        if (pilot_set.count(i)) continue;
        Eigen::VectorXd observed(result.subset.size());
        bool ok = true;
        for (size_t s = 0; s < result.subset.size(); ++s) {
            auto measured = backend.measure(candidates[i], result.subset[s]);
            ++result.evaluations_used;
            if (!measured) {
                ok = false;
                break;
            }
            observed(static_cast<Eigen::Index>(s)) = util::compute_utility(
                *measured, backend.baseline(result.subset[s]));
        }
        if (!ok) {
            result.invalid.push_back(candidates[i]);
            continue;
        }
        double estimate = gauss::estimate_mean_utility(result.model, result.subset, observed);
        result.ranking.push_back({candidates[i], estimate});
    }
    std::stable_sort(result.ranking.begin(), result.ranking.end(),
                     [](const RankedCandidate& a, const RankedCandidate& b) {
                         return a.estimate > b.estimate;
                     });
    return result;
}

double recall_at(const std::vector<std::string>& estimated_ranking,
                 const std::vector<std::string>& true_ranking, int top_n, int r) {
    if (top_n <= 0) throw std::invalid_argument("top_n must be positive");
    std::set<std::string> truth(true_ranking.begin(),
                                true_ranking.begin() +
                                    std::min<size_t>(top_n, true_ranking.size()));
    int hits = 0;
    int limit = std::min<int>(r, static_cast<int>(estimated_ranking.size()));
    for (int i = 0; i < limit; ++i)
        if (truth.count(estimated_ranking[i])) ++hits;
    return static_cast<double>(hits) / static_cast<double>(top_n);
}

std::vector<int> select_baseline_random(int m, int k, uint64_t seed) {
    if (k > m) throw std::invalid_argument("K must be <= M");
    Rng rng(seed);
    return rng.sample_without_replacement(m, k);
}

std::vector<int> select_baseline_bwvar(const std::vector<std::vector<double>>& bw_series, int k) {
    std::vector<double> variance(bw_series.size());
    for (size_t i = 0; i < bw_series.size(); ++i) {
        const auto& s = bw_series[i];
        if (s.empty()) throw std::invalid_argument("empty bandwidth series");
        double mean = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
        double acc = 0.0;
        for (double v : s) acc += (v - mean) * (v - mean);
        variance[i] = acc / s.size();  // population variance
    }
    return select_baseline_bwvar_from_variance(variance, k);
}

std::vector<int> select_baseline_bwvar_from_variance(const std::vector<double>& variance, int k) {
    const int m = static_cast<int>(variance.size());
    if (k > m) throw std::invalid_argument("K must be <= M");
    std::vector<int> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return variance[a] > variance[b]; });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

double eval_savings(int m, int n, int l, int k, int r) {
    if (m <= 0 || n <= 0 || l <= 0 || k <= 0 || r < 0 || l > n || k > m)
        throw std::invalid_argument("invalid savings arguments");
    double used = static_cast<double>(l) * m + static_cast<double>(n - l) * k +
                  static_cast<double>(m) * r;
    return 1.0 - used / (static_cast<double>(m) * n);
}

std::string RecallReport::to_json() const {
    json j;
    j["plan"] = {{"L", plan.pilot_size}, {"K", plan.subset_size}, {"R", plan.recall_cut},
                 {"top_n", plan.top_n},  {"seed", plan.seed}};
    j["selector"] = to_string(plan.selector);
    j["K"] = plan.subset_size;
    json arr = json::array();
    for (const auto& [r, v] : recall_at_r) arr.push_back({{"R", r}, {"value", v}});
    j["recall"] = arr;
    j["evaluations_used"] = evaluations_used;
    j["savings"] = savings;
    return j.dump(2);
}

}  // namespace ccopt::harness
