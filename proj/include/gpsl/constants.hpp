#pragma once

#include <cmath>

#include "gpsl/errors.hpp"

namespace gpsl {

/// Fundamental constants entering the model. Defaults are the CODATA 2018
/// SI values; the unit-free factory sets G = hbar = m0 = 1, which is the
/// natural system for every dimensionless result in this library.
struct PhysicalConstants {
    double G = 6.67430e-11;          ///< gravitational constant, m^3 kg^-1 s^-2
    double hbar = 1.054571817e-34;   ///< reduced Planck constant, J s
    double m0 = 1.67262192369e-27;   ///< reference (proton) mass, kg

    static constexpr PhysicalConstants si() { return {}; }
    static constexpr PhysicalConstants unit_free() { return {1.0, 1.0, 1.0}; }

    void validate() const {
        if (!(G > 0.0) || !(hbar > 0.0) || !(m0 > 0.0))
            throw DomainError("PhysicalConstants: G, hbar, m0 must all be strictly positive");
    }
};

/// The two free parameters of the collapse dynamics plus the constants they
/// combine with: collapse rate per reference mass and smearing radius.
struct ModelParams {
    double gamma = 1.0;   ///< collapse rate, s^-1
    double r_C = 1.0;     ///< smearing radius, m
    PhysicalConstants constants = PhysicalConstants::unit_free();

    /// Unit-free parameter set (gamma = r_C = 1, G = hbar = m0 = 1): the
    /// default for tests; SI values enter only at the CLI boundary.
    static constexpr ModelParams unit_free() { return {}; }

    void validate() const {
        constants.validate();
        if (!(gamma > 0.0)) throw DomainError("ModelParams: gamma must be > 0");
        if (!(r_C > 0.0)) throw DomainError("ModelParams: r_C must be > 0");
    }
};

/// A point particle of given mass. The gravitational feedback length r_p is
/// always recomputed from the current parameter set, never cached, so the
/// two can not drift apart.
struct ParticleSpec {
    double mass = 1.0;  ///< kg

    void validate() const {
        if (!(mass > 0.0)) throw DomainError("ParticleSpec: mass must be > 0");
    }

    /// Feedback length r_p = G m0 m / (gamma hbar): the radius at which the
    /// per-event gravitational phase kick becomes order one.
    double r_p(const ModelParams& p) const {
        return p.constants.G * p.constants.m0 * mass / (p.gamma * p.constants.hbar);
    }
};

/// Extra rate constant used only by the continuous-measurement CSL
/// comparator model.
struct TDParams {
    double gamma_csl = 1.0;  ///< CSL rate constant, m^3 s^-1

    void validate() const {
        if (!(gamma_csl > 0.0)) throw DomainError("TDParams: gamma_csl must be > 0");
    }
};

}  // namespace gpsl
