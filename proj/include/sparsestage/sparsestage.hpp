#pragma once

#include "sparsestage/error.hpp"
#include "sparsestage/rng.hpp"
#include "sparsestage/model.hpp"
#include "sparsestage/solver.hpp"
#include "sparsestage/multistage.hpp"
#include "sparsestage/spectra.hpp"
#include "sparsestage/theory.hpp"
#include "sparsestage/diagnostics.hpp"
#include "sparsestage/harness.hpp"
#include "sparsestage/io.hpp"
