#pragma once

#include "rmra/composite.hpp"
#include "rmra/dataset_io.hpp"
#include "rmra/datagen.hpp"
#include "rmra/diffusion.hpp"
#include "rmra/error.hpp"
#include "rmra/kmeans.hpp"
#include "rmra/linalg.hpp"
#include "rmra/matrix_io.hpp"
#include "rmra/parallel.hpp"
#include "rmra/random.hpp"
#include "rmra/spd.hpp"
#include "rmra/spsd.hpp"
#include "rmra/tree.hpp"
#include "rmra/verify.hpp"
