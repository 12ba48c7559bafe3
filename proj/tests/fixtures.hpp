#pragma once

// Shared regression fixtures: the two worked linear systems and helpers.

#include "rdode/model.hpp"

namespace fixtures {

using rdode::Mat;

// Three-component system whose slow/fast subsystem J23 carries the
// instability; D_v = 0.001, D_w = 1 on (0, pi) exhibits DDI.
inline Mat j23_unstable_fixture() {
    return Mat{{-1.0, 9.0, 1.5}, {-9.0, -1.0, 5.0}, {-2.0, 3.5, -1.0}};
}

// System with unstable J12 that needs a domain enlargement before any fast
// diffusion coefficient can destabilize it.
inline Mat j12_scaling_fixture() {
    return Mat{{-1.0, 1.0, -3.0}, {2.0, -1.0, -5.0}, {2.0, 1.0, -1.5}};
}

} // namespace fixtures
