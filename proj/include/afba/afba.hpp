#pragma once

#include "afba/dataio.hpp"
#include "afba/errors.hpp"
#include "afba/harness.hpp"
#include "afba/linalg.hpp"
#include "afba/momentum.hpp"
#include "afba/prox.hpp"
#include "afba/rng.hpp"
#include "afba/solver.hpp"
#include "afba/svm.hpp"
#include "afba/synthetic.hpp"
