#pragma once

#include "dnahm/error.hpp"
#include "dnahm/numlin.hpp"
#include "dnahm/chain.hpp"
#include "dnahm/evolution.hpp"
#include "dnahm/spectral.hpp"
#include "dnahm/lax.hpp"
#include "dnahm/continuum.hpp"
#include "dnahm/fixtures.hpp"
