#ifndef SQSTAT_SQSTAT_HPP
#define SQSTAT_SQSTAT_HPP

#include "sqstat/error.hpp"
#include "sqstat/log_math.hpp"
#include "sqstat/squeeze.hpp"
#include "sqstat/spectrum.hpp"
#include "sqstat/thermo_state.hpp"
#include "sqstat/ensemble.hpp"
#include "sqstat/models.hpp"
#include "sqstat/fluctuation.hpp"
#include "sqstat/kinetics.hpp"
#include "sqstat/inference.hpp"

#endif  // SQSTAT_SQSTAT_HPP
