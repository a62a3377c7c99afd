// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

// Umbrella header: the whole toolkit for reading an analog gauge's bank
// angle from images with a small CNN.

#ifndef BANKREAD_BANKREAD_HPP
#define BANKREAD_BANKREAD_HPP

#include "bankread/angle_grid.hpp"
#include "bankread/bench.hpp"
#include "bankread/dataset.hpp"
#include "bankread/dataset_io.hpp"
#include "bankread/errors.hpp"
#include "bankread/glyph.hpp"
#include "bankread/idx.hpp"
#include "bankread/image.hpp"
#include "bankread/model_io.hpp"
#include "bankread/net.hpp"
#include "bankread/noise.hpp"
#include "bankread/pgm.hpp"
#include "bankread/pipeline.hpp"
#include "bankread/prng.hpp"
#include "bankread/readout.hpp"
#include "bankread/sweeps.hpp"
#include "bankread/train.hpp"
#include "bankread/warp.hpp"

#endif // BANKREAD_BANKREAD_HPP
