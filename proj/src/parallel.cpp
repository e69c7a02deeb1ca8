#include "imcmc/parallel.hpp"

#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace imcmc {

int resolve_workers(int requested) {
    if (requested > 0) return requested;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

DiagnosticsSeries run_replicates_serial(int replicates, const ReplicateFn& fn) {
    DiagnosticsSeries merged;
    for (int rep = 0; rep < replicates; ++rep) merged.append(fn(rep));
    return merged;
}

DiagnosticsSeries run_replicates_parallel(int replicates, const ReplicateFn& fn, int workers) {
    int n_workers = resolve_workers(workers);
    if (n_workers <= 1) return run_replicates_serial(replicates, fn);

    std::vector<DiagnosticsSeries> slots(replicates);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(n_workers)
#endif
    for (int rep = 0; rep < replicates; ++rep) slots[rep] = fn(rep);

    DiagnosticsSeries merged;
    for (auto& s : slots) merged.append(s);
    return merged;
}

}  // namespace imcmc
