#pragma once

// Umbrella header for the library (the CLI layer in cli.hpp is separate
// because it needs the vendored JSON header).

#include "halfline/errors.hpp"
#include "halfline/signed_perm.hpp"
#include "halfline/scattering.hpp"
#include "halfline/contour_quad.hpp"
#include "halfline/asep_exact.hpp"
#include "halfline/bose_exact.hpp"
#include "halfline/oracles.hpp"
#include "halfline/identities.hpp"
