#pragma once

// Umbrella header for the higher-order kernel pooling library.

#include "hok/classify.hpp"
#include "hok/common.hpp"
#include "hok/config.hpp"
#include "hok/dataset.hpp"
#include "hok/errors.hpp"
#include "hok/gmm.hpp"
#include "hok/indexing.hpp"
#include "hok/kernels.hpp"
#include "hok/pivots.hpp"
#include "hok/pooling.hpp"
#include "hok/sequence.hpp"
#include "hok/synth.hpp"
#include "hok/tensor.hpp"
