#pragma once

#include "caldera/analysis.hpp"
#include "caldera/cmat.hpp"
#include "caldera/decompose.hpp"
#include "caldera/errors.hpp"
#include "caldera/hessian.hpp"
#include "caldera/ldlq.hpp"
#include "caldera/linalg.hpp"
#include "caldera/lplr.hpp"
#include "caldera/quantizer.hpp"
#include "caldera/random.hpp"
#include "caldera/rcr.hpp"
#include "caldera/rht.hpp"
#include "caldera/synth.hpp"
#include "caldera/types.hpp"
