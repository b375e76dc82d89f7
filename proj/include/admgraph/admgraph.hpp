#pragma once

#include "admgraph/numeric.hpp"
#include "admgraph/graph.hpp"
#include "admgraph/parallel.hpp"
#include "admgraph/ollivier.hpp"
#include "admgraph/grid.hpp"
#include "admgraph/fields.hpp"
#include "admgraph/mass.hpp"
#include "admgraph/torus.hpp"
#include "admgraph/salami.hpp"
#include "admgraph/rigidity.hpp"
#include "admgraph/instances.hpp"
