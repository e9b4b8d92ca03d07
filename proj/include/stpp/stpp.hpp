#pragma once

// Spanning-tree push-pull decentralized optimization: umbrella header.

#include "stpp/graph.hpp"
#include "stpp/harness.hpp"
#include "stpp/mixing.hpp"
#include "stpp/optimizer.hpp"
#include "stpp/oracle.hpp"
#include "stpp/rng.hpp"
#include "stpp/theory.hpp"
#include "stpp/tree.hpp"
