#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lagflow/flows.hpp"

namespace lagflow {

enum class PresetId { Kirchhoff, Gerstner, HarmonicKoebe, SteadyShear };

std::vector<std::string> preset_names();
std::optional<PresetId> preset_from_name(const std::string& name);
std::string preset_name(PresetId id);

// Constant-dilatation flow with F0' = A e^{ikz}, beta == lambda, nu0 = 0.
// The label domain must be narrower than 2*pi/|k| horizontally so that F0 is
// univalent.
FlowSpec kirchhoff(double A, double k, double lambda, Domain domain);
Domain kirchhoff_default_domain();

// Rotational flow with nu0 = 0, xi0 = sqrt(k*g), F0 = z and
// G0 = -(i/k) e^{-ikz}; labels live strictly below the line b = 0. Particles
// move on circles of radius e^{kb}/k with angular frequency xi0.
FlowSpec gerstner(double k, double g_accel, Domain domain);
Domain gerstner_default_domain();

// The harmonic Koebe map f + conj(mu g) with |mu| = 1, on a disk grid capped
// at radius 0.97 (f and g blow up at z = 1). mu = 1 is univalent; some
// unimodular rotations of g are not.
HarmonicMap harmonic_koebe(Complex mu);
Expr harmonic_koebe_f();
Expr harmonic_koebe_g();

// Steady constant-dilatation flow: F0 = z, lambda = 0.5, beta == lambda,
// nu0 = 0. The labelling z + conj(lambda z) is a time-independent shear.
FlowSpec steady_shear();

}  // namespace lagflow
