#include "imcmc/rng.hpp"

#include <cmath>

namespace imcmc {

double Rng::next_normal() {
    // Box-Muller; discard the second coordinate to keep draws stateless.
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::next_laplace(double c) {
    if (!(c > 0.0)) throw InvalidParameterError("laplace scale must be positive");
    double u = next_double() - 0.5;
    double mag = -std::log(1.0 - 2.0 * std::abs(u)) / c;
    return u < 0.0 ? -mag : mag;
}

}  // namespace imcmc
