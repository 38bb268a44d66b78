#pragma once

#include <string>
#include <vector>

#include "vclab/compressor.hpp"

namespace vclab {

struct Stage {
    double fraction = 0.0;  // share of total training steps, may be 0
    CompressorSpec spec;
};

// Ordered stage schedule. Built-in schemes run heavy-to-light compression
// and always end with an identity stage.
struct StagePlan {
    std::string name;
    std::vector<Stage> stages;

    void validate() const;  // fractions nonnegative, summing to 1 within 1e-9
};

enum class SchemeScale { paper, desk };

extern const std::vector<std::string> kSchemeNames;

// Table-defined schemes: single, two, three-deeper, three-wider,
// four-wider-then-deeper, four-deeper-then-wider. At paper scale the
// compression layers are 2 and 16 (of 32); at desk scale the deep layer
// maps to n_layers/2. Strides are unchanged.
StagePlan named_scheme(const std::string& name, SchemeScale scale, int n_layers);

// Floor allocation by fraction; the rounding remainder goes to the final
// stage, then any zero-step stage with positive fraction takes one step
// from the largest stage. Counts sum exactly to total_steps.
std::vector<long long> split_steps(long long total_steps, const StagePlan& plan);

// Stage boundaries are half-open; step must lie in [0, total_steps).
const CompressorSpec& spec_at_step(const StagePlan& plan, long long step, long long total_steps);

}  // namespace vclab
