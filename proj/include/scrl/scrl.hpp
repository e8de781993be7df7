#pragma once

// scrl: reward estimation for unsupervised test-time reinforcement learning.
// Converts groups of rollouts into selective positive pseudo-labels,
// entropy-gated negative pseudo-labels, shaped rewards and group-normalized
// advantages, plus a synthetic-policy simulator for studying label quality
// and convergence against the majority-voting baseline.

#include "scrl/config.hpp"
#include "scrl/consensus.hpp"
#include "scrl/entropy.hpp"
#include "scrl/error.hpp"
#include "scrl/labeling.hpp"
#include "scrl/pipeline.hpp"
#include "scrl/reward.hpp"
#include "scrl/rng.hpp"
#include "scrl/rollout.hpp"
#include "scrl/rollout_io.hpp"
#include "scrl/sim.hpp"
#include "scrl/sim_io.hpp"
