#pragma once

#include "kacward/errors.hpp"
#include "kacward/graph_io.hpp"
#include "kacward/ising.hpp"
#include "kacward/isoradial.hpp"
#include "kacward/kac_ward.hpp"
#include "kacward/planar_graph.hpp"
#include "kacward/regimes.hpp"
#include "kacward/spectral.hpp"
