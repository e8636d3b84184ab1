#pragma once

// Umbrella header for the numerical core (the CLI layer lives in aniso/cli).

#include "aniso/anisotropy.hpp"
#include "aniso/bprofile.hpp"
#include "aniso/certify.hpp"
#include "aniso/errors.hpp"
#include "aniso/grid.hpp"
#include "aniso/io.hpp"
#include "aniso/jet.hpp"
#include "aniso/linalg.hpp"
#include "aniso/ode.hpp"
#include "aniso/parallel.hpp"
#include "aniso/pfunction.hpp"
#include "aniso/potential.hpp"
#include "aniso/profile1d.hpp"
#include "aniso/quadrature.hpp"
#include "aniso/richardson.hpp"
#include "aniso/sampling.hpp"
#include "aniso/solver.hpp"
#include "aniso/stencil.hpp"
#include "aniso/wulff.hpp"
