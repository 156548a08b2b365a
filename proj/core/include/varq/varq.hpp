#pragma once

#include "varq/covariant_fields.hpp"
#include "varq/discrete.hpp"
#include "varq/error.hpp"
#include "varq/hydrodynamics.hpp"
#include "varq/mechanics.hpp"
#include "varq/numerics.hpp"
#include "varq/potential.hpp"
#include "varq/quantum_fields.hpp"
#include "varq/wavefunction.hpp"
