#pragma once

#include <functional>

#include "imcmc/diagnostics.hpp"

namespace imcmc {

using ReplicateFn = std::function<DiagnosticsSeries(int)>;

// Serial reference implementation of the replicate sweep. Kept separate so
// the OpenMP path can be checked and benchmarked against it; both produce
// records in replicate order, so outputs are identical.
DiagnosticsSeries run_replicates_serial(int replicates, const ReplicateFn& fn);

// OpenMP sweep. `workers` = 0 picks the available cores; 1 falls back to
// the serial reference.
DiagnosticsSeries run_replicates_parallel(int replicates, const ReplicateFn& fn, int workers);

int resolve_workers(int requested);

}  // namespace imcmc
