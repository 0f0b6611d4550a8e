#ifndef GMWMX_GMWMX_HPP
#define GMWMX_GMWMX_HPP

#include "gmwmx/design.hpp"
#include "gmwmx/errors.hpp"
#include "gmwmx/estimator.hpp"
#include "gmwmx/fbm.hpp"
#include "gmwmx/io.hpp"
#include "gmwmx/missingness.hpp"
#include "gmwmx/noise_model.hpp"
#include "gmwmx/sim.hpp"
#include "gmwmx/theo_wv.hpp"
#include "gmwmx/version.hpp"
#include "gmwmx/wavelet.hpp"
#include "gmwmx/wv_cov.hpp"

#endif
