#pragma once

#include <vector>

#include "rgm/pipeline.hpp"

namespace rgm {

/// Small, fast versions of the property suites (exact and oracle checks).
std::vector<Assertion> run_selftest();

/// Gauss-Hermite nodes/weights for the weight exp(-x^2/2)/sqrt(2 pi)
/// (probabilists' normalisation, weights sum to 1) via Golub-Welsch.
void gauss_hermite(int nodes, Vec& x, Vec& w);

}  // namespace rgm
