#pragma once

#include "ltrcf/error.hpp"
#include "ltrcf/random.hpp"
#include "ltrcf/ltrc_core.hpp"
#include "ltrcf/npmle.hpp"
#include "ltrcf/tree.hpp"
#include "ltrcf/tree_cif.hpp"
#include "ltrcf/tree_rrf.hpp"
#include "ltrcf/forest.hpp"
#include "ltrcf/dynamic_curve.hpp"
#include "ltrcf/metrics.hpp"
#include "ltrcf/simgen.hpp"
#include "ltrcf/experiment.hpp"
#include "ltrcf/model_io.hpp"
#include "ltrcf/io.hpp"
#include "ltrcf/svg.hpp"
