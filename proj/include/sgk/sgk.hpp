// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sgk/combitech.hpp"
#include "sgk/errors.hpp"
#include "sgk/geometry.hpp"
#include "sgk/interpolant.hpp"
#include "sgk/io.hpp"
#include "sgk/kernel.hpp"
#include "sgk/metrics.hpp"
#include "sgk/solver.hpp"
#include "sgk/tensor.hpp"
