#ifndef SPECLAB_SPECLAB_HPP
#define SPECLAB_SPECLAB_HPP

#include "speclab/anomaly.hpp"
#include "speclab/checkpoint.hpp"
#include "speclab/data.hpp"
#include "speclab/errors.hpp"
#include "speclab/format.hpp"
#include "speclab/fourier.hpp"
#include "speclab/gradcheck.hpp"
#include "speclab/layers.hpp"
#include "speclab/model.hpp"
#include "speclab/optim.hpp"
#include "speclab/rng.hpp"
#include "speclab/spectral.hpp"
#include "speclab/tensor.hpp"
#include "speclab/trace.hpp"
#include "speclab/train.hpp"

#endif
