// Umbrella header.
#pragma once

#include "etrs/common.hpp"
#include "etrs/driver.hpp"
#include "etrs/duality.hpp"
#include "etrs/instances.hpp"
#include "etrs/lngm.hpp"
#include "etrs/operators.hpp"
#include "etrs/oracle.hpp"
#include "etrs/pencil.hpp"
#include "etrs/problem.hpp"
#include "etrs/reduction.hpp"
#include "etrs/report.hpp"
#include "etrs/trs.hpp"
