#pragma once

#include "awr/adversary.hpp"
#include "awr/asu2.hpp"
#include "awr/budget.hpp"
#include "awr/error.hpp"
#include "awr/gf2n.hpp"
#include "awr/keys.hpp"
#include "awr/net.hpp"
#include "awr/protocol.hpp"
#include "awr/rational.hpp"
#include "awr/rng.hpp"
#include "awr/simulate.hpp"
#include "awr/uc.hpp"
