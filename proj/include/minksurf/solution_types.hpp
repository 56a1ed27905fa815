#pragma once

#include "minksurf/grid.hpp"

namespace minksurf {

/// Solution in light-cone gauge: radius R and the potentials zeta, kappa
/// sampled over a (tau, mu) chart, with the boost constant eta.
struct LightconeTriple {
    GridDomain domain;
    ScalarField R;
    ScalarField zeta;
    ScalarField kappa;
    double eta = 1.0;
};

/// Solution in orthonormal gauge: radius r, height z and the potential v
/// sampled over a (t, phi) chart, with the constant E.
struct PhysicalPair {
    GridDomain domain;
    ScalarField r;
    ScalarField z;
    ScalarField v;
    double E = 1.0;
};

}  // namespace minksurf
