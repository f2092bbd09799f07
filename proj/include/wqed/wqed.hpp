// wqed.hpp — umbrella header
#pragma once

#include "wqed/correlation.hpp"
#include "wqed/coupling.hpp"
#include "wqed/csv.hpp"
#include "wqed/dynamics.hpp"
#include "wqed/errors.hpp"
#include "wqed/experiment.hpp"
#include "wqed/hilbert.hpp"
#include "wqed/noise.hpp"
#include "wqed/oracle.hpp"
#include "wqed/osolver.hpp"
#include "wqed/thermal_squeezed.hpp"
#include "wqed/types.hpp"
