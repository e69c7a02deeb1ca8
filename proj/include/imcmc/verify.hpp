#pragma once

#include <string>
#include <vector>

#include "imcmc/experiment.hpp"

#include "json.hpp"

namespace imcmc {

struct CertificationEntry {
    std::string name;
    std::string status;  // "pass", "fail", "skip", "info"
    std::string detail;
};

struct CertificationReport {
    std::vector<CertificationEntry> entries;

    bool all_pass() const;
    std::string render_table() const;
    nlohmann::json to_json() const;
};

// Runs the certification suites on a configured plan: kernel validation,
// oracle cross-checks, Poisson residuals and the resolvent sandwich, the
// invariant-measure Lipschitz bounds, invariance of the level kernels, the
// product-kernel fixed point, and the occupation variation bounds.
// Certificates that need ergodicity are skipped with a notice on models
// where the minorization fails.
CertificationReport run_certifications(const ExperimentPlan& plan);

}  // namespace imcmc
