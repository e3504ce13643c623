#pragma once

// Engine, views, propagators, search, models and the tuple-set oracle.
// report.hpp and verify.hpp additionally need nlohmann/json.

#include "boxview/approx.hpp"
#include "boxview/common.hpp"
#include "boxview/decompose.hpp"
#include "boxview/models.hpp"
#include "boxview/oracle.hpp"
#include "boxview/propagators.hpp"
#include "boxview/rng.hpp"
#include "boxview/search.hpp"
#include "boxview/store.hpp"
#include "boxview/view_node.hpp"
#include "boxview/views.hpp"
