#pragma once

#include "unhippo/errors.hpp"
#include "unhippo/exchange.hpp"
#include "unhippo/hippo.hpp"
#include "unhippo/kalman.hpp"
#include "unhippo/legendre.hpp"
#include "unhippo/matfun.hpp"
#include "unhippo/online.hpp"
#include "unhippo/regularized.hpp"
#include "unhippo/signals.hpp"
#include "unhippo/ssm.hpp"
