#pragma once

#include "onebit/agent.hpp"
#include "onebit/channel.hpp"
#include "onebit/distributions.hpp"
#include "onebit/family.hpp"
#include "onebit/fixtures.hpp"
#include "onebit/hardness.hpp"
#include "onebit/harness.hpp"
#include "onebit/localization.hpp"
#include "onebit/query.hpp"
#include "onebit/refine.hpp"
#include "onebit/rng.hpp"
#include "onebit/transcript.hpp"
#include "onebit/variants.hpp"
