#pragma once

// Additive autoencoder intrinsic-dimension estimation: bias (normalization),
// linear trend (PCA) and nonlinear residual (bias-free tanh feedforward
// autoencoder) fitted serially, with thresholded knee detection on the
// reconstruction-error trajectory.

#include "addae/dataio.hpp"
#include "addae/diagnostics.hpp"
#include "addae/linear.hpp"
#include "addae/network.hpp"
#include "addae/optim.hpp"
#include "addae/rng.hpp"
#include "addae/serialize.hpp"
#include "addae/sweep.hpp"
#include "addae/train.hpp"
#include "addae/version.hpp"
