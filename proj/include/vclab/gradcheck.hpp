#pragma once

#include <functional>

#include "vclab/tensor.hpp"

namespace vclab {

// Compares the analytic gradient of f with central finite differences.
//
// f must rebuild its graph from x's current values on every call and
// return a scalar. h must lie in [1e-8, 1e-4]. Returns the maximum over
// entries of |analytic - numeric| / max(1, |analytic|).
//
// max_entries > 0 probes only that many entries of x (a deterministic
// seeded subset) so large parameter tensors stay affordable.
double grad_check(const std::function<Tensor()>& f, Tensor x, double h,
                  int max_entries = 0, uint64_t probe_seed = 0);

}  // namespace vclab
