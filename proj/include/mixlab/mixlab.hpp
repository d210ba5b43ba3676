#ifndef MIXLAB_MIXLAB_HPP
#define MIXLAB_MIXLAB_HPP

#include "mixlab/core.hpp"
#include "mixlab/expr.hpp"
#include "mixlab/field.hpp"
#include "mixlab/quadrature.hpp"
#include "mixlab/ode.hpp"
#include "mixlab/lagrangian.hpp"
#include "mixlab/period.hpp"
#include "mixlab/actionangle.hpp"
#include "mixlab/fft2.hpp"
#include "mixlab/spectral.hpp"
#include "mixlab/data.hpp"
#include "mixlab/oracle.hpp"
#include "mixlab/diagnostics.hpp"
#include "mixlab/io.hpp"
#include "mixlab/config.hpp"
#include "mixlab/pool.hpp"
#include "mixlab/experiments.hpp"

#endif
