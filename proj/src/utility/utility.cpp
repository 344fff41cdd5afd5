#include "ccopt/utility/utility.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace ccopt::util {

double compute_utility(const Measurement& m, const Measurement& baseline,
                       const UtilityConfig& cfg) {
    if (baseline.tput_mbps <= 0.0 || baseline.lat_ms <= 0.0) {
        throw DegenerateBaseline("baseline measurement must be positive");
    }
    double dt = (m.tput_mbps - baseline.tput_mbps) / baseline.tput_mbps;
    double dl = (m.lat_ms - baseline.lat_ms) / baseline.lat_ms;
    return dt - cfg.lambda * dl;
}

UtilityMatrix::UtilityMatrix(std::vector<std::string> algorithms,
                             std::vector<std::string> conditions)
    : algorithms_(std::move(algorithms)), conditions_(std::move(conditions)) {
    values_.assign(algorithms_.size() * conditions_.size(), 0.0);
    mask_.assign(values_.size(), false);
}

void UtilityMatrix::clear_row(int i) {
    for (int j = 0; j < cols(); ++j) {
        values_[idx(i, j)] = 0.0;
        mask_[idx(i, j)] = false;
    }
}

bool UtilityMatrix::row_complete(int i) const {
    for (int j = 0; j < cols(); ++j)
        if (!mask_[idx(i, j)]) return false;
    return true;
}

double average_utility(const UtilityMatrix& m, int row) {
    if (!m.row_complete(row)) throw MissingCells("row has masked cells");
    double sum = 0.0, comp = 0.0;  // Kahan
    for (int j = 0; j < m.cols(); ++j) {
        double y = m.at(row, j) - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum / m.cols();
}

void UtilityMatrix::write_csv(std::ostream& os) const {
    os << "alg_id";
    for (const auto& c : conditions_) os << ',' << c;
    os << '\n';
    os.precision(17);
    for (int i = 0; i < rows(); ++i) {
        os << algorithms_[i];
        for (int j = 0; j < cols(); ++j) {
            os << ',';
            if (present(i, j)) os << at(i, j);
        }
        os << '\n';
    }
}

UtilityMatrix UtilityMatrix::read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty utility CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> conds;
    {
        std::stringstream ss(line);
        std::string cell;
        bool first = true;
        while (std::getline(ss, cell, ',')) {
            if (first) {
                if (cell != "alg_id") throw std::runtime_error("bad CSV header");
                first = false;
            } else {
                conds.push_back(cell);
            }
        }
    }
    std::vector<std::string> algs;
    std::vector<std::vector<std::pair<bool, double>>> rows;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        algs.push_back(cell);
        std::vector<std::pair<bool, double>> row;
        while (std::getline(ss, cell, ',')) {
            if (cell.empty()) {
                row.push_back({false, 0.0});
            } else {
                double v = 0.0;
                auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                if (ec != std::errc()) throw std::runtime_error("bad CSV number: " + cell);
                row.push_back({true, v});
            }
        }
        while (row.size() < conds.size()) row.push_back({false, 0.0});
        rows.push_back(std::move(row));
    }
    UtilityMatrix m(algs, conds);
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < conds.size(); ++j)
            if (rows[i][j].first) m.set(static_cast<int>(i), static_cast<int>(j), rows[i][j].second);
    return m;
}

}  // namespace ccopt::util
