#pragma once

#include "smd/rng.hpp"
#include "smd/prox.hpp"
#include "smd/oracles.hpp"
#include "smd/solver.hpp"
#include "smd/problems.hpp"
#include "smd/records.hpp"
#include "smd/verify.hpp"
