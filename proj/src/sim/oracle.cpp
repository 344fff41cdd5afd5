#include "ccopt/sim/oracle.hpp"

#include <algorithm>

#include "ccopt/rng.hpp"

namespace ccopt::sim {

GaussianOracleBackend::GaussianOracleBackend(gauss::GaussianModel model, uint64_t seed)
    : model_(std::move(model)), seed_(seed) {
    Eigen::LLT<Eigen::MatrixXd> llt(model_.sigma);
    if (llt.info() != Eigen::Success)
        throw gauss::SingularBlock("oracle model covariance not positive definite");
    chol_ = llt.matrixL();
}

Eigen::VectorXd GaussianOracleBackend::draw(const std::string& candidate_id) const {
    const int m = model_.size();
    Rng rng(mix_seed(seed_, "oracle-draw", fnv1a(candidate_id)));
    Eigen::VectorXd z(m);
    for (int i = 0; i < m; ++i) z(i) = rng.normal();
    return model_.mu + chol_ * z;
}

Eigen::VectorXd GaussianOracleBackend::utilities(const std::string& candidate_id) const {
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = cache_.find(candidate_id);
        if (it != cache_.end()) return it->second;
    }
    Eigen::VectorXd u = draw(candidate_id);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    return cache_.emplace(candidate_id, std::move(u)).first->second;
}

std::optional<util::Measurement> GaussianOracleBackend::measure(const std::string& candidate_id,
                                                                int condition_index) const {
    double u = utilities(candidate_id)(condition_index);
    // tput ratio carries the utility, latency ratio is zero
    double tput = 1000.0 * (1.0 + u);
    tput = std::max(tput, 1e-9);  // draws past -1 would break the tput > 0 invariant
    return util::Measurement{tput, 50.0};
}

util::Measurement GaussianOracleBackend::baseline(int) const { return {1000.0, 50.0}; }

}  // namespace ccopt::sim
