#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccopt/utility/utility.hpp"

namespace ccopt::gauss {

struct TooFewRows : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularBlock : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Multivariate Gaussian over the M condition-utilities. `sigma` is stored
// post-ridge and is positive definite; `ridge` records the epsilon added.
struct GaussianModel {
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    double ridge = 0.0;

    int size() const { return static_cast<int>(mu.size()); }

    std::string to_json() const;
    static GaussianModel from_json(const std::string& text);
};

struct ConditionalMoments {
    Eigen::VectorXd mu_cond;     // length M - |S|
    Eigen::MatrixXd sigma_cond;  // (M-|S|) x (M-|S|)
};

struct SubsetSelection {
    std::vector<int> order;                  // pick order, length K
    std::vector<double> cond_var_trajectory;  // length K+1; [0] = Var(mean) unconditioned
};

// Column means + sample covariance (denominator L-1) of a fully observed
// pilot matrix, then ridge eps = ridge_scale * trace/M escalated by decades
// until Cholesky succeeds.
GaussianModel fit_gaussian(const util::UtilityMatrix& pilot, double ridge_scale = 1e-8);
GaussianModel fit_gaussian(const Eigen::MatrixXd& pilot_rows, double ridge_scale = 1e-8);

// mu_U + Sigma_US Sigma_SS^-1 (u_S - mu_S); Sigma_UU - Sigma_US Sigma_SS^-1 Sigma_SU.
ConditionalMoments conditional_moments(const GaussianModel& model, const std::vector<int>& subset,
                                       const Eigen::VectorXd& observed);

// (1/M^2) * element sum of Sigma_{U|S}; observed rows/cols contribute zero.
// Empty subset gives the unconditional variance of the mean.
double cond_var_of_mean(const GaussianModel& model, const std::vector<int>& subset);

// Serial reference route: builds the conditional covariance block explicitly
// and sums its elements. Kept independent of the fast path for testing.
double cond_var_of_mean_ref(const GaussianModel& model, const std::vector<int>& subset);

// Greedy minimization of cond_var_of_mean, one pick at a time; ties broken
// by lowest index. Candidate scoring within a step runs in parallel; the
// argmin is reduced in fixed index order, so results are thread-count
// independent.
SubsetSelection greedy_select(const GaussianModel& model, int k);

// argmax_k (Var(u_k) + sum_{j!=k} Cov(u_j,u_k))^2 / Var(u_k); equivalent to
// the first greedy pick.
int first_pick_closed_form(const GaussianModel& model);

struct ExhaustiveResult {
    std::vector<int> subset;  // sorted
    double cond_var;
};

// Enumerates all K-subsets (C(M,K) <= 1e6); test oracle for greedy.
ExhaustiveResult exhaustive_select(const GaussianModel& model, int k);

// (sum u_S + sum mu_{U|S}) / M.
double estimate_mean_utility(const GaussianModel& model, const std::vector<int>& subset,
                             const Eigen::VectorXd& observed);

struct SelectionReport {
    SubsetSelection selection;
    std::string method;  // "greedy" | "random" | "bwvar"
};

std::string selection_to_json(const SelectionReport& report);

}  // namespace ccopt::gauss
