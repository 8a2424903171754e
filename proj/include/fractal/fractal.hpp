#pragma once

#include "fractal/block.hpp"
#include "fractal/curves.hpp"
#include "fractal/error.hpp"
#include "fractal/export.hpp"
#include "fractal/metrics.hpp"
#include "fractal/random.hpp"
#include "fractal/ssm.hpp"
