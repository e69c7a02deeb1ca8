// Compares the serial reference replicate sweep against the OpenMP path on
// a mid-size workload and checks that both produce identical records.

#include <chrono>
#include <cstdio>
#include <string>

#include "imcmc/experiment.hpp"
#include "imcmc/models.hpp"
#include "imcmc/parallel.hpp"
#include "imcmc/samplers.hpp"

using namespace imcmc;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    int replicates = argc > 1 ? std::atoi(argv[1]) : 64;
    std::int64_t horizon = argc > 2 ? std::atoll(argv[2]) : 8192;

    FeynmanKacModel model = fk3_model();
    std::vector<LevelKernelSpec> specs;
    specs.push_back(default_base_spec(model));
    for (int k = 1; k <= model.num_levels(); ++k) specs.emplace_back(DirectPhiSpec{});
    auto cps = dyadic_checkpoints(6, 14, horizon);
    ExactFlow flow = solve_flow(model);
    std::vector<std::vector<TestFunction>> basis;
    for (const auto& s : model.spaces) basis.push_back(test_function_basis(s, 7));

    auto worker = [&](int rep) {
        DiagnosticsSeries out;
        IMcmcRun run(model, specs, 7, static_cast<std::uint64_t>(rep));
        auto cp = cps.begin();
        for (std::int64_t n = 0; n <= horizon; ++n) {
            if (n > 0) run.advance();
            while (cp != cps.end() && *cp == n) {
                double inv = 1.0 / static_cast<double>(n + 1);
                for (int k = 0; k <= model.num_levels(); ++k) {
                    const auto& eta = run.occupation(k);
                    for (const auto& f : basis[k]) {
                        double mean = 0.0;
                        for (std::size_t i = 0; i < f.values.size(); ++i)
                            mean += static_cast<double>(eta.counts[i]) * f.values[i];
                        out.records.push_back(
                            {n, k, rep, f.name,
                             mean * inv - integrate(flow.targets[k], f.values)});
                    }
                }
                ++cp;
            }
        }
        return out;
    };

    std::printf("replicates=%d horizon=%lld workers=%d\n", replicates,
                static_cast<long long>(horizon), resolve_workers(0));

    auto t0 = std::chrono::steady_clock::now();
    DiagnosticsSeries serial = run_replicates_serial(replicates, worker);
    double t_serial = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    DiagnosticsSeries parallel = run_replicates_parallel(replicates, worker, 0);
    double t_parallel = seconds_since(t0);

    bool identical = render_csv(serial) == render_csv(parallel);
    std::printf("serial    %8.3f s\n", t_serial);
    std::printf("openmp    %8.3f s   speedup %.2fx\n", t_parallel,
                t_parallel > 0 ? t_serial / t_parallel : 0.0);
    std::printf("identical outputs: %s\n", identical ? "yes" : "NO");
    return identical ? 0 : 1;
}
