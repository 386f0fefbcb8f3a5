#pragma once

// Umbrella header for the tamperlock library.

#include "tamperlock/attack_sim.hpp"
#include "tamperlock/channels.hpp"
#include "tamperlock/core.hpp"
#include "tamperlock/experiments.hpp"
#include "tamperlock/hamming_code.hpp"
#include "tamperlock/ldpc.hpp"
#include "tamperlock/multimsg.hpp"
#include "tamperlock/prf_mask.hpp"
#include "tamperlock/rng.hpp"
#include "tamperlock/stats.hpp"
#include "tamperlock/watermark.hpp"
