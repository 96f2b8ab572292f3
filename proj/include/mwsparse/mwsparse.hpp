#pragma once

#include "mwsparse/dyadic.hpp"
#include "mwsparse/bracket.hpp"
#include "mwsparse/fractal.hpp"
#include "mwsparse/measure.hpp"
#include "mwsparse/extremal.hpp"
#include "mwsparse/operators.hpp"
#include "mwsparse/report.hpp"
#include "mwsparse/verify.hpp"
#include "mwsparse/norms.hpp"
#include "mwsparse/probes.hpp"
#include "mwsparse/suite.hpp"
