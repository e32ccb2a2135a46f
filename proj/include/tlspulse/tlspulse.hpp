#pragma once

#include "tlspulse/core.hpp"
#include "tlspulse/units.hpp"
#include "tlspulse/hamiltonians.hpp"
#include "tlspulse/propagator.hpp"
#include "tlspulse/counterdiabatic.hpp"
#include "tlspulse/invariants.hpp"
#include "tlspulse/polynomial.hpp"
#include "tlspulse/nelder_mead.hpp"
#include "tlspulse/designer_few.hpp"
#include "tlspulse/designer_many.hpp"
#include "tlspulse/scenario.hpp"
#include "tlspulse/cli.hpp"
