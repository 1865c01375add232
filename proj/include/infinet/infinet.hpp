#pragma once

#include "infinet/activation.hpp"
#include "infinet/blobs.hpp"
#include "infinet/common.hpp"
#include "infinet/conv_kernel.hpp"
#include "infinet/covariance.hpp"
#include "infinet/dataset.hpp"
#include "infinet/deep_kernel.hpp"
#include "infinet/gram.hpp"
#include "infinet/gram_io.hpp"
#include "infinet/io_csv.hpp"
#include "infinet/io_idx.hpp"
#include "infinet/kernel_core.hpp"
#include "infinet/kernel_spec.hpp"
#include "infinet/klr.hpp"
#include "infinet/linalg.hpp"
#include "infinet/pa.hpp"
#include "infinet/parallel.hpp"
#include "infinet/rng.hpp"
#include "infinet/softmax.hpp"
#include "infinet/stability.hpp"
