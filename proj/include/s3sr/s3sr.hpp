#pragma once

#include "action.hpp"
#include "cartesian.hpp"
#include "core.hpp"
#include "error.hpp"
#include "hamiltonian.hpp"
#include "hyper.hpp"
#include "kernel.hpp"
#include "numeric.hpp"
#include "version.hpp"
