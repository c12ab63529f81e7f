#pragma once

#include "bandwidth.hpp"
#include "bias_oracle.hpp"
#include "decomposition.hpp"
#include "density.hpp"
#include "estimators.hpp"
#include "experiments.hpp"
#include "kernel.hpp"
#include "quadrature.hpp"
#include "regions.hpp"
#include "rng.hpp"
