#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <mutex>
#include <string>
#include <unordered_map>

#include "ccopt/gauss/model.hpp"
#include "ccopt/harness/backend.hpp"

namespace ccopt::sim {

// Test backend whose per-candidate utility vectors are exact seeded draws
// from a known N(mu, Sigma). measure() encodes u_j as a throughput ratio
// against a unit baseline, so compute_utility recovers the draw exactly.
class GaussianOracleBackend : public harness::EvalBackend {
public:
    GaussianOracleBackend(gauss::GaussianModel model, uint64_t seed);

    harness::BackendCaps caps() const override { return {true, true}; }
    std::optional<util::Measurement> measure(const std::string& candidate_id,
                                             int condition_index) const override;
    util::Measurement baseline(int condition_index) const override;
    int num_conditions() const override { return model_.size(); }

    // the exact drawn utility vector for a candidate (ground truth)
    Eigen::VectorXd utilities(const std::string& candidate_id) const;

private:
    Eigen::VectorXd draw(const std::string& candidate_id) const;

    gauss::GaussianModel model_;
    Eigen::MatrixXd chol_;  // lower factor of sigma
    uint64_t seed_;
    mutable std::mutex cache_mutex_;
    mutable std::unordered_map<std::string, Eigen::VectorXd> cache_;
};

}  // namespace ccopt::sim
