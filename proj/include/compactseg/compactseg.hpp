#pragma once

// Umbrella header.

#include "compactseg/admm.hpp"
#include "compactseg/cg.hpp"
#include "compactseg/errors.hpp"
#include "compactseg/experiment.hpp"
#include "compactseg/fields.hpp"
#include "compactseg/kernel.hpp"
#include "compactseg/maxflow.hpp"
#include "compactseg/metrics.hpp"
#include "compactseg/pd_solvers.hpp"
#include "compactseg/region_force.hpp"
#include "compactseg/synth.hpp"
