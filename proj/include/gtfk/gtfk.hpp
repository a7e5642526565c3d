#pragma once

#include "config.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "models.hpp"
#include "oracles/convolution.hpp"
#include "oracles/monte_carlo.hpp"
#include "oracles/pde.hpp"
#include "parallel.hpp"
#include "pricing.hpp"
#include "quadrature.hpp"
#include "self_consistent.hpp"
#include "tables.hpp"
