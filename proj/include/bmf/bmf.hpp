#pragma once

#include "bmf/arnoldi.hpp"
#include "bmf/bounds.hpp"
#include "bmf/dense.hpp"
#include "bmf/driver.hpp"
#include "bmf/experiments.hpp"
#include "bmf/frechet.hpp"
#include "bmf/kernels.hpp"
#include "bmf/linear_operator.hpp"
#include "bmf/matrix_market.hpp"
#include "bmf/types.hpp"
