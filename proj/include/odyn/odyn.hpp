#ifndef ODYN_ODYN_HPP
#define ODYN_ODYN_HPP

#include "odyn/commands.hpp"
#include "odyn/config.hpp"
#include "odyn/dynamics.hpp"
#include "odyn/errors.hpp"
#include "odyn/experiment.hpp"
#include "odyn/network.hpp"
#include "odyn/output.hpp"
#include "odyn/parallel.hpp"
#include "odyn/random.hpp"
#include "odyn/spatial.hpp"

#endif // ODYN_ODYN_HPP
