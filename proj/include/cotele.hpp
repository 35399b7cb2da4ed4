#pragma once

#include "cotele/types.hpp"
#include "cotele/dense.hpp"
#include "cotele/mode_space.hpp"
#include "cotele/coherent.hpp"
#include "cotele/ortho.hpp"
#include "cotele/fock_ops.hpp"
#include "cotele/random.hpp"
#include "cotele/models.hpp"
#include "cotele/verify.hpp"
#include "cotele/config.hpp"
