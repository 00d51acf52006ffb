#pragma once

// Umbrella header.
#include "dhrad/dh_core.hpp"
#include "dhrad/eigopt.hpp"
#include "dhrad/hinf.hpp"
#include "dhrad/kernels.hpp"
#include "dhrad/matrix_market.hpp"
#include "dhrad/probgen.hpp"
#include "dhrad/shifted_solve.hpp"
#include "dhrad/structured.hpp"
#include "dhrad/transfer.hpp"
#include "dhrad/unstructured.hpp"
#include "dhrad/verify.hpp"
