#pragma once

#include "qism/errors.hpp"
#include "qism/scalar.hpp"
#include "qism/dense.hpp"
#include "qism/rmatrix.hpp"
#include "qism/chain.hpp"
#include "qism/bethe.hpp"
#include "qism/combinatorics.hpp"
#include "qism/decomposition.hpp"
#include "qism/oracle.hpp"
#include "qism/sampling.hpp"
