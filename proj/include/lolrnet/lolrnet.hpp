// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lolrnet/commands.hpp"
#include "lolrnet/config.hpp"
#include "lolrnet/control.hpp"
#include "lolrnet/core.hpp"
#include "lolrnet/network.hpp"
#include "lolrnet/ranking.hpp"
#include "lolrnet/rng.hpp"
#include "lolrnet/simulate.hpp"
