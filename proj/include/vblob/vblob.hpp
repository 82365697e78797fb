#pragma once

#include "vblob/vec2.hpp"
#include "vblob/errors.hpp"
#include "vblob/parallel.hpp"
#include "vblob/quadrature.hpp"
#include "vblob/kernels.hpp"
#include "vblob/grid.hpp"
#include "vblob/initial_vorticity.hpp"
#include "vblob/ensemble.hpp"
#include "vblob/discretization.hpp"
#include "vblob/snapshot.hpp"
#include "vblob/tree.hpp"
#include "vblob/record.hpp"
#include "vblob/dynamics.hpp"
#include "vblob/diagnostics.hpp"
#include "vblob/transport.hpp"
#include "vblob/serfati.hpp"
#include "vblob/config.hpp"
#include "vblob/csv.hpp"
#include "vblob/harness.hpp"
