#pragma once

#include "urysohn/basis.hpp"
#include "urysohn/errors.hpp"
#include "urysohn/mesh.hpp"
#include "urysohn/problem.hpp"
#include "urysohn/quadrature.hpp"
#include "urysohn/solver.hpp"
#include "urysohn/study.hpp"
