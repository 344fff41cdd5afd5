#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccopt::util {

struct Measurement {
    double tput_mbps;  // average of repeated bulk runs
    double lat_ms;     // median request completion
};

struct UtilityConfig {
    double lambda = 10.0;  // latency weight
};

struct DegenerateBaseline : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingCells : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Relative throughput gain minus lambda-weighted relative latency change
// versus the baseline on the same condition.
double compute_utility(const Measurement& m, const Measurement& baseline,
                       const UtilityConfig& cfg = {});

// Algorithms x conditions grid; masked cells (partial evaluation) are
// first-class.
class UtilityMatrix {
public:
    UtilityMatrix() = default;
    UtilityMatrix(std::vector<std::string> algorithms, std::vector<std::string> conditions);

    int rows() const { return static_cast<int>(algorithms_.size()); }
    int cols() const { return static_cast<int>(conditions_.size()); }

    const std::vector<std::string>& algorithms() const { return algorithms_; }
    const std::vector<std::string>& conditions() const { return conditions_; }

    double at(int i, int j) const { return values_[idx(i, j)]; }
    bool present(int i, int j) const { return mask_[idx(i, j)]; }
    void set(int i, int j, double v) {
        values_[idx(i, j)] = v;
        mask_[idx(i, j)] = true;
    }
    void clear_row(int i);
    bool row_complete(int i) const;

    // CSV: header `alg_id,<cond_id_1>,...`; missing cells empty.
    void write_csv(std::ostream& os) const;
    static UtilityMatrix read_csv(std::istream& is);

private:
    size_t idx(int i, int j) const {
        return static_cast<size_t>(i) * conditions_.size() + static_cast<size_t>(j);
    }
    std::vector<std::string> algorithms_;
    std::vector<std::string> conditions_;
    std::vector<double> values_;
    std::vector<bool> mask_;
};

// Arithmetic mean of a fully observed row; throws MissingCells otherwise.
double average_utility(const UtilityMatrix& m, int row);

}  // namespace ccopt::util
