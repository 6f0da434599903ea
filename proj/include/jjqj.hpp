#pragma once

// Everything in one include.

#include "jjqj/analysis.hpp"
#include "jjqj/commands.hpp"
#include "jjqj/config.hpp"
#include "jjqj/constants.hpp"
#include "jjqj/engine.hpp"
#include "jjqj/errors.hpp"
#include "jjqj/hamiltonian.hpp"
#include "jjqj/landau_zener.hpp"
#include "jjqj/oracle.hpp"
#include "jjqj/parallel.hpp"
#include "jjqj/physics.hpp"
#include "jjqj/propagator.hpp"
#include "jjqj/rng.hpp"
