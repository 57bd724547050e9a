#pragma once

// Umbrella header for the copula-conformal time series library.

#include "ccp/conformal.hpp"
#include "ccp/copula.hpp"
#include "ccp/dataset.hpp"
#include "ccp/errors.hpp"
#include "ccp/eval.hpp"
#include "ccp/forecaster.hpp"
#include "ccp/generators.hpp"
#include "ccp/matrix.hpp"
#include "ccp/pipeline.hpp"
#include "ccp/search.hpp"
