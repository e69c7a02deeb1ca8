#pragma once

#include <vector>

#include "imcmc/models.hpp"

// Frozen reference values for the fk3 fixture, computed independently of
// the library (full-precision forward recursion and path enumeration).
namespace fk3_expected {

inline const std::vector<std::vector<double>> targets = {
    {1.0 / 3, 1.0 / 3, 1.0 / 3},
    {0.3, 0.42857142857142855, 0.2714285714285714},
    {0.25248226950354613, 0.4333333333333333, 0.3141843971631205},
    {0.3519555190497252, 0.38203702533645045, 0.2660074556138245},
};

inline const std::vector<double> log_gamma1 = {0.0, 0.15415067982725836, 0.34358970439007686,
                                               0.4591322493571002};

inline const std::vector<double> potential_means = {1.1666666666666667, 1.2085714285714284,
                                                    1.122482269503546};

// beta(P_{l,k}) on fk3, keyed (l, k).
struct BetaEntry {
    int l;
    int k;
    double beta;
};
inline const std::vector<BetaEntry> beta_table = {
    {1, 1, 0.5},          {1, 2, 0.1933035714285714}, {1, 3, 0.11900905125399278},
    {2, 2, 0.5},          {2, 3, 0.2806460332477362}, {3, 3, 0.5},
};

// Q_2 applied to the indicator of the first state at level 2.
inline const std::vector<double> q2_ind0 = {0.48, 0.30000000000000004, 0.12};

// Rows of P_{1,2}.
inline const std::vector<std::vector<double>> p12_rows = {
    {0.3714285714285715, 0.3971428571428572, 0.23142857142857146},
    {0.2220472440944882, 0.4464566929133858, 0.331496062992126},
    {0.17812500000000003, 0.44062500000000004, 0.38125},
};

// H_{1,2} = Q_{1,2}(1) / Q_1(1).
inline const std::vector<double> h12 = {1.05, 1.27, 1.28};

inline constexpr double eps_l_m1 = 1.0 / 6.0;  // minorization floor of L, one step
inline const std::vector<double> eps_g = {0.25, 0.5333333333333333, 0.35};
inline constexpr double beta_l = 0.5;

}  // namespace fk3_expected
