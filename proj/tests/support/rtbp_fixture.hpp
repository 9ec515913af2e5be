#pragma once

#include "phtori/seeds.hpp"

namespace phtori::testing {

inline constexpr double kEarthMoon = 1.215058560962404e-2;
inline constexpr double kFamilyRho = 0.031865;

inline const RtbpModel& earth_moon() {
    static const RtbpModel model{RtbpParams{}};
    return model;
}

inline const PeriodicOrbit& vertical_orbit() {
    static const PeriodicOrbit po =
        lyapunov_po(earth_moon(), Generator::vertical, PoTarget::with_rotation(kFamilyRho));
    return po;
}

// Narrow vertical-generator torus around the orbit above, converged to 1e-12.
inline const TorusState& narrow_torus() {
    static const TorusState s = [] {
        RefineConfig rc;
        rc.eps = 1e-12;
        rc.eps_w = 1e-12;
        return refine_seed(earth_moon(), seed_from_po(earth_moon(), vertical_orbit(), SeedConfig{}), rc);
    }();
    return s;
}

}  // namespace phtori::testing
