#pragma once

#include "betaexp/algnum.hpp"
#include "betaexp/expansion.hpp"
#include "betaexp/layers.hpp"
#include "betaexp/pcfun.hpp"
#include "betaexp/pexp.hpp"
#include "betaexp/stochastic.hpp"
