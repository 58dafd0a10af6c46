#pragma once

#include "sailor/numerics/adam.hpp"
#include "sailor/numerics/checkpoint.hpp"
#include "sailor/numerics/dense.hpp"
#include "sailor/numerics/gradcheck.hpp"
#include "sailor/numerics/losses.hpp"
#include "sailor/numerics/ops.hpp"
#include "sailor/numerics/rng.hpp"
#include "sailor/numerics/sparse.hpp"
#include "sailor/numerics/tape.hpp"
