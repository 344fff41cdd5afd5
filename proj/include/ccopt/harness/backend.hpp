#pragma once

#include <optional>
#include <string>

#include "ccopt/utility/utility.hpp"

namespace ccopt::harness {

struct BackendCaps {
    bool deterministic = true;
    bool parallel_safe = true;
};

// Evaluation backend contract: one (candidate, condition) measurement.
// nullopt means the measurement failed; the harness treats that as the
// candidate being invalid (compile-failure semantics).
class EvalBackend {
public:
    virtual ~EvalBackend() = default;
    virtual BackendCaps caps() const = 0;
    virtual std::optional<util::Measurement> measure(const std::string& candidate_id,
                                                     int condition_index) const = 0;
    virtual util::Measurement baseline(int condition_index) const = 0;
    virtual int num_conditions() const = 0;
};

}  // namespace ccopt::harness
