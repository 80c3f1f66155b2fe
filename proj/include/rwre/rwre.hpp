#pragma once

#include "rwre/checks.hpp"
#include "rwre/config.hpp"
#include "rwre/error.hpp"
#include "rwre/extended_real.hpp"
#include "rwre/gw_tree.hpp"
#include "rwre/harness.hpp"
#include "rwre/law.hpp"
#include "rwre/lerrw.hpp"
#include "rwre/line_walk.hpp"
#include "rwre/numeric.hpp"
#include "rwre/parallel.hpp"
#include "rwre/random.hpp"
#include "rwre/report.hpp"
#include "rwre/stats.hpp"
#include "rwre/tree_walk.hpp"
