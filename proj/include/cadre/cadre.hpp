#pragma once

// Convenience include of the whole library.

#include "cadre/binio.hpp"
#include "cadre/checkpoint.hpp"
#include "cadre/data.hpp"
#include "cadre/labels.hpp"
#include "cadre/layers.hpp"
#include "cadre/metrics.hpp"
#include "cadre/network.hpp"
#include "cadre/rng.hpp"
#include "cadre/tensor.hpp"
#include "cadre/training.hpp"
