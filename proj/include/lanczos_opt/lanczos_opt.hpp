#pragma once

#include "lanczos_opt/errors.hpp"
#include "lanczos_opt/linalg.hpp"
#include "lanczos_opt/quadrature.hpp"
#include "lanczos_opt/stieltjes.hpp"
#include "lanczos_opt/kernels.hpp"
#include "lanczos_opt/krylov.hpp"
#include "lanczos_opt/approx.hpp"
#include "lanczos_opt/bounds.hpp"
#include "lanczos_opt/rng.hpp"
#include "lanczos_opt/experiment.hpp"
#include "lanczos_opt/plot.hpp"
#include "lanczos_opt/figures.hpp"
#include "lanczos_opt/acceptance.hpp"
