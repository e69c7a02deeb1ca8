#pragma once

#include <string>
#include <vector>

#include "imcmc/kernels.hpp"

namespace imcmc {

// Bundled finite reference models. fk3 is the canonical certification
// fixture: every entry of L positive, strictly positive potentials,
// uniform initial law, so conditions (G) and (L)_1 hold with eps(L) > 0.
FeynmanKacModel fk3_model();

// fk3 stretched to 8 levels (potentials cycle through the fk3 tables);
// used by the uniform-in-level diagnostics.
FeynmanKacModel fk3_deep_model(int levels = 7);

// Path-space version of fk3 (levels live on growing tuple spaces).
FeynmanKacModel fk3_path_model();

// Independence-type proposal for Metropolis-Hastings moves on the fk3 path
// model: K_l(u, .) = 1/2 uniform + 1/2 Ltilde_l(last(u), .), strictly
// positive wherever the reference kernel is.
FiniteKernel fk3_path_proposal(const FeynmanKacModel& path_model, int level);

// Annealing flow on a small grid: pi^(l) ~ exp(-beta_l V) realized as a
// Feynman-Kac model with G_l = exp(-(beta_{l+1}-beta_l) V) and L_{l+1} a
// pi^(l+1)-reversible Metropolis kernel with uniform proposal.
FeynmanKacModel annealing_model(int levels = 7);

struct BundledModelInfo {
    std::string name;
    std::string description;
    bool finite;
};

const std::vector<BundledModelInfo>& bundled_models();

// Builds a bundled finite model by name; throws ConfigError for unknown or
// non-finite names.
FeynmanKacModel make_bundled_model(const std::string& name);

}  // namespace imcmc
