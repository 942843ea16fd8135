#pragma once

/// Independent reference implementations and frozen high-precision values
/// used to verify the library's special functions and integrals. The series
/// here are deliberately written from the textbook definitions (Maclaurin
/// erf, Bessel power series) with no code shared with src/, so agreement is
/// meaningful. Tabulated constants were produced once with an arbitrary-
/// precision evaluator at 40 significant digits and are frozen.

#include <cmath>

namespace gpsl::test_oracles {

/// erf by its Maclaurin series; accurate to ~1e-15 for |x| <= 3.5 with the
/// 60-term cap (terms alternate and shrink fast in that range).
inline double series_erf(double x) {
    const double x2 = x * x;
    double term = x;
    double sum = x;
    for (int n = 1; n < 60; ++n) {
        term *= -x2 / n;
        sum += term / (2 * n + 1);
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return 2.0 / std::sqrt(M_PI) * sum;
}

/// Modified Bessel I0 by its power series sum_k (x^2/4)^k / (k!)^2;
/// converges for all x, used here up to x = 30.
inline double series_i0(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 120; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

struct Pair {
    double x;
    double expected;
};

struct Triple {
    double a;
    double x;
    double expected;
};

inline constexpr Pair kErfTable[] = {
    {0.5, 0.52049987781304654}, {1.0, 0.84270079294971487},
    {1.5, 0.96610514647531073}, {2.0, 0.99532226501895273},
    {2.5, 0.99959304798255504}, {3.0, 0.99997790950300141},
    {5.0, 0.99999999999846254}, {8.0, 1.0},
};

inline constexpr Pair kI0Table[] = {
    {0.5, 1.0634833707413235},  {1.0, 1.2660658777520083},
    {5.0, 27.239871823604447},  {15.0, 339649.37329791388},
    {20.0, 43558282.559553533}, {100.0, 1.0737517071310738e+42},
};

inline constexpr Pair kI0eTable[] = {
    {1.0, 0.46575960759364044},
    {20.0, 0.089780311884826022},
    {700.0, 0.015081295651531358},
};

/// inverse standard normal CDF: p -> z with Phi(z) = p.
inline constexpr Pair kInvPhiTable[] = {
    {0.5, 0.0},
    {0.975, 1.9599639845400542},
    {0.9999, 3.7190164854556806},
    {1e-10, -6.3613409024040562},
    {0.3, -0.52440051270804078},
};

/// regularized lower incomplete gamma P(a, x).
inline constexpr Triple kGammaPTable[] = {
    {0.5, 0.5, 0.6826894921370859},
    {2.5, 1.0, 0.15085496391539036},
    {5.0, 10.0, 0.97074731192303893},
    {10.0, 3.0, 0.0011024881301154797},
};

/// Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{k-1} e^{-2k^2 l^2}.
inline constexpr Pair kKolmogorovQTable[] = {
    {0.5, 0.96394524366487509},
    {1.0, 0.26999967167735452},
    {1.5, 0.022217962616525129},
};

/// Feedback integral F(d), frozen from an independent scripted evaluation
/// (4D integrand coded separately, adaptive quadrature), 6 decimals.
inline constexpr Pair kFtildeTable[] = {
    {0.05, 0.011101}, {0.1, 0.044285}, {0.2, 0.175250},
    {0.3, 0.387344},  {1.0, 3.140976}, {2.0, 4.966412},
    {3.5, 2.166913},  {5.0, 0.629670}, {6.0, 0.303937},
};

/// Mean-force integral F_G(d_r) from the same independent evaluation.
inline constexpr Pair kForceIntegralTable[] = {
    {0.05, 6.644e-3}, {0.5, 6.172e-2}, {1.0, 9.9374e-2},
    {3.0, 5.393e-2},  {10.0, 5.0000e-3},
};

}  // namespace gpsl::test_oracles
