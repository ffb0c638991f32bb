/**
 * @file wslrr.hpp
 * @brief Umbrella header: contamination models, decontamination, corrected
 *        risks, weak-data sampling, training and the verification harness.
 */
#pragma once

#include "wslrr/core.hpp"
#include "wslrr/datagen.hpp"
#include "wslrr/decontam.hpp"
#include "wslrr/empirical.hpp"
#include "wslrr/error.hpp"
#include "wslrr/io.hpp"
#include "wslrr/risk.hpp"
#include "wslrr/rng.hpp"
#include "wslrr/scenarios.hpp"
#include "wslrr/train.hpp"
#include "wslrr/verify.hpp"
