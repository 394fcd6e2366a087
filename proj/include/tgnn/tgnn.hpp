#pragma once

// Convenience header for the whole library.

#include "tgnn/adam.hpp"
#include "tgnn/augment.hpp"
#include "tgnn/bank.hpp"
#include "tgnn/check.hpp"
#include "tgnn/checkpoint.hpp"
#include "tgnn/config.hpp"
#include "tgnn/core.hpp"
#include "tgnn/experiment.hpp"
#include "tgnn/gradcheck.hpp"
#include "tgnn/io_util.hpp"
#include "tgnn/mpnn.hpp"
#include "tgnn/rng.hpp"
#include "tgnn/rwkernel.hpp"
#include "tgnn/split.hpp"
#include "tgnn/synthetic.hpp"
#include "tgnn/tensor.hpp"
#include "tgnn/trainer.hpp"
#include "tgnn/tu_io.hpp"
