#include "ccopt/gauss/model.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ccopt::gauss {

using json = nlohmann::json;

std::string GaussianModel::to_json() const {
    json j;
    const int m = size();
    j["M"] = m;
    j["mu"] = std::vector<double>(mu.data(), mu.data() + m);
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(m) * m);
    for (int i = 0; i < m; ++i)
        for (int c = 0; c < m; ++c) flat.push_back(sigma(i, c));
    j["sigma"] = flat;  // row-major
    j["ridge"] = ridge;
    return j.dump();
}

GaussianModel GaussianModel::from_json(const std::string& text) {
    json j = json::parse(text);
    GaussianModel model;
    int m = j.at("M").get<int>();
    auto mu = j.at("mu").get<std::vector<double>>();
    auto flat = j.at("sigma").get<std::vector<double>>();
    if (static_cast<int>(mu.size()) != m || static_cast<int>(flat.size()) != m * m)
        throw std::runtime_error("model JSON dimensions inconsistent");
    model.mu = Eigen::Map<Eigen::VectorXd>(mu.data(), m);
    model.sigma.resize(m, m);
    for (int i = 0; i < m; ++i)
        for (int c = 0; c < m; ++c) model.sigma(i, c) = flat[static_cast<size_t>(i) * m + c];
    model.ridge = j.at("ridge").get<double>();
    return model;
}

GaussianModel fit_gaussian(const util::UtilityMatrix& pilot, double ridge_scale) {
    const int rows = pilot.rows();
    const int cols = pilot.cols();
    Eigen::MatrixXd x(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (!pilot.row_complete(i)) throw util::MissingCells("pilot matrix has masked cells");
        for (int j = 0; j < cols; ++j) x(i, j) = pilot.at(i, j);
    }
    return fit_gaussian(x, ridge_scale);
}

GaussianModel fit_gaussian(const Eigen::MatrixXd& pilot_rows, double ridge_scale) {
    const int rows = static_cast<int>(pilot_rows.rows());
    const int m = static_cast<int>(pilot_rows.cols());
    if (rows < 2) throw TooFewRows("need at least 2 pilot rows");
    GaussianModel model;
    model.mu = pilot_rows.colwise().mean();
    Eigen::MatrixXd centered = pilot_rows.rowwise() - model.mu.transpose();
    model.sigma = centered.transpose() * centered / static_cast<double>(rows - 1);
    model.sigma = (model.sigma + model.sigma.transpose()) / 2.0;

    double trace = model.sigma.trace();
    double eps = ridge_scale * (trace > 0.0 ? trace / m : 1.0);
    Eigen::MatrixXd base = model.sigma;
    for (int attempt = 0; attempt < 60; ++attempt) {
        model.sigma = base + eps * Eigen::MatrixXd::Identity(m, m);
        Eigen::LLT<Eigen::MatrixXd> llt(model.sigma);
        if (llt.info() == Eigen::Success) {
            model.ridge = eps;
            return model;
        }
        eps *= 10.0;
    }
    throw SingularBlock("covariance not positive definite after ridge escalation");
}

namespace {

std::vector<int> complement(int m, const std::vector<int>& subset) {
    std::vector<bool> in(m, false);
    for (int i : subset) in[static_cast<size_t>(i)] = true;
    std::vector<int> out;
    out.reserve(m - subset.size());
    for (int i = 0; i < m; ++i)
        if (!in[i]) out.push_back(i);
    return out;
}

// Cholesky of Sigma_SS with a single jitter retry (10x model ridge).
Eigen::LLT<Eigen::MatrixXd> chol_ss(const GaussianModel& model, const Eigen::MatrixXd& ss) {
    Eigen::LLT<Eigen::MatrixXd> llt(ss);
    if (llt.info() == Eigen::Success) return llt;
    double jitter = 10.0 * (model.ridge > 0.0 ? model.ridge : 1e-12);
    Eigen::MatrixXd jittered =
        ss + jitter * Eigen::MatrixXd::Identity(ss.rows(), ss.cols());
    Eigen::LLT<Eigen::MatrixXd> retry(jittered);
    if (retry.info() != Eigen::Success)
        throw SingularBlock("Sigma_SS Cholesky failed; refit with larger ridge");
    return retry;
}

Eigen::MatrixXd pick_block(const Eigen::MatrixXd& sigma, const std::vector<int>& rows,
                           const std::vector<int>& cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j) out(i, j) = sigma(rows[i], cols[j]);
    return out;
}

}  // namespace

ConditionalMoments conditional_moments(const GaussianModel& model, const std::vector<int>& subset,
                                       const Eigen::VectorXd& observed) {
    const int m = model.size();
    if (subset.empty() || static_cast<int>(subset.size()) >= m)
        throw std::invalid_argument("subset must be nonempty and smaller than M");
    if (observed.size() != static_cast<Eigen::Index>(subset.size()))
        throw std::invalid_argument("observed vector does not match subset");
    std::vector<int> rest = complement(m, subset);

    Eigen::MatrixXd ss = pick_block(model.sigma, subset, subset);
    Eigen::MatrixXd us = pick_block(model.sigma, rest, subset);  // Sigma_US
    Eigen::MatrixXd uu = pick_block(model.sigma, rest, rest);

    Eigen::VectorXd mu_s(subset.size()), mu_u(rest.size());
    for (size_t i = 0; i < subset.size(); ++i) mu_s(i) = model.mu(subset[i]);
    for (size_t i = 0; i < rest.size(); ++i) mu_u(i) = model.mu(rest[i]);

    auto llt = chol_ss(model, ss);
    Eigen::VectorXd innovation = observed - mu_s;
    ConditionalMoments out;
    out.mu_cond = mu_u + us * llt.solve(innovation);
    out.sigma_cond = uu - us * llt.solve(us.transpose());
    out.sigma_cond = (out.sigma_cond + out.sigma_cond.transpose()) / 2.0;
    return out;
}

double cond_var_of_mean(const GaussianModel& model, const std::vector<int>& subset) {
    const int m = model.size();
    const double mm = static_cast<double>(m) * m;
    if (subset.empty()) return model.sigma.sum() / mm;
    if (static_cast<int>(subset.size()) >= m) return 0.0;

    // element sum of Sigma_{U|S} without materializing the block:
    //   sum(UU) = sum(all) - 2 * sum_{i in S} r_i + sum(SS)
    //   1^T Sigma_US Sigma_SS^-1 Sigma_SU 1 = v^T Sigma_SS^-1 v,
    //   v_i = r_i - sum_{j in S} sigma_ij  for i in S,  r_i = row sum.
    Eigen::MatrixXd ss = pick_block(model.sigma, subset, subset);
    double total = model.sigma.sum();
    double sum_ss = ss.sum();
    Eigen::VectorXd v(subset.size());
    double cross = 0.0;
    for (size_t i = 0; i < subset.size(); ++i) {
        double r = model.sigma.row(subset[i]).sum();
        cross += r;
        v(i) = r - ss.row(static_cast<Eigen::Index>(i)).sum();
    }
    double sum_uu = total - 2.0 * cross + sum_ss;
    auto llt = chol_ss(model, ss);
    double reduction = v.dot(llt.solve(v));
    double out = (sum_uu - reduction) / mm;
    return out;
}

double cond_var_of_mean_ref(const GaussianModel& model, const std::vector<int>& subset) {
    const int m = model.size();
    const double mm = static_cast<double>(m) * m;
    if (subset.empty()) return model.sigma.sum() / mm;
    if (static_cast<int>(subset.size()) >= m) return 0.0;
    std::vector<int> rest = complement(m, subset);
    Eigen::MatrixXd ss = pick_block(model.sigma, subset, subset);
    Eigen::MatrixXd us = pick_block(model.sigma, rest, subset);
    Eigen::MatrixXd uu = pick_block(model.sigma, rest, rest);
    auto llt = chol_ss(model, ss);
    Eigen::MatrixXd cond = uu - us * llt.solve(us.transpose());
    return cond.sum() / mm;
}

SubsetSelection greedy_select(const GaussianModel& model, int k) {
    const int m = model.size();
    if (k < 1 || k >= m) throw std::invalid_argument("need 1 <= K < M");
    SubsetSelection sel;
    sel.cond_var_trajectory.push_back(cond_var_of_mean(model, {}));
    std::vector<bool> chosen(m, false);
    for (int step = 0; step < k; ++step) {
        std::vector<double> score(m, std::numeric_limits<double>::infinity());
#pragma omp parallel for schedule(dynamic)
        for (int cand = 0; cand < m; ++cand) {
            if (chosen[cand]) continue;
            std::vector<int> trial = sel.order;
            trial.push_back(cand);
            score[cand] = cond_var_of_mean(model, trial);
        }
        int best = -1;
        for (int cand = 0; cand < m; ++cand) {
            if (chosen[cand]) continue;
            if (best < 0 || score[cand] < score[best]) best = cand;
        }
        chosen[best] = true;
        sel.order.push_back(best);
        sel.cond_var_trajectory.push_back(score[best]);
    }
    return sel;
}

int first_pick_closed_form(const GaussianModel& model) {
    const int m = model.size();
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < m; ++k) {
        double row_sum = model.sigma.row(k).sum();  // Var(u_k) + sum_{j!=k} Cov
        double var = model.sigma(k, k);
        double score = row_sum * row_sum / var;
        if (score > best_score) {
            best_score = score;
            best = k;
        }
    }
    return best;
}

ExhaustiveResult exhaustive_select(const GaussianModel& model, int k) {
    const int m = model.size();
    if (k < 1 || k >= m) throw std::invalid_argument("need 1 <= K < M");
    // C(M,K) guard
    double count = 1.0;
    for (int i = 0; i < k; ++i) count = count * (m - i) / (i + 1);
    if (count > 1e6) throw TooLarge("too many subsets to enumerate");

    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    ExhaustiveResult best{{}, std::numeric_limits<double>::infinity()};
    while (true) {
        double v = cond_var_of_mean(model, idx);
        if (v < best.cond_var) {
            best.cond_var = v;
            best.subset = idx;
        }
        int pos = k - 1;
        while (pos >= 0 && idx[pos] == m - k + pos) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int i = pos + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
    }
    return best;
}

double estimate_mean_utility(const GaussianModel& model, const std::vector<int>& subset,
                             const Eigen::VectorXd& observed) {
    const int m = model.size();
    if (static_cast<int>(subset.size()) == m) return observed.sum() / m;
    ConditionalMoments cm = conditional_moments(model, subset, observed);
    return (observed.sum() + cm.mu_cond.sum()) / m;
}

std::string selection_to_json(const SelectionReport& report) {
    json j;
    j["order"] = report.selection.order;
    j["trajectory"] = report.selection.cond_var_trajectory;
    j["method"] = report.method;
    return j.dump();
}

}  // namespace ccopt::gauss
