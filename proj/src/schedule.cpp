#include "vclab/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace vclab {

void StagePlan::validate() const {
    if (stages.empty()) throw std::invalid_argument("stage plan '" + name + "' has no stages");
    double sum = 0.0;
    for (const auto& s : stages) {
        if (s.fraction < 0.0) {
            throw std::invalid_argument("stage plan '" + name + "' has a negative fraction");
        }
        if (!s.spec.is_identity() && s.spec.stride < 1) {
            throw std::invalid_argument("stage plan '" + name + "' has stride < 1");
        }
        sum += s.fraction;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("stage plan '" + name + "' fractions sum to " +
                                    std::to_string(sum) + ", expected 1");
    }
}

const std::vector<std::string> kSchemeNames = {
    "single",  "two", "three-deeper", "three-wider", "four-wider-then-deeper",
    "four-deeper-then-wider",
};

namespace {

CompressorSpec pool_spec(int layer, int stride) {
    CompressorSpec spec;
    spec.kind = CompressorKind::avg_pool;
    spec.layer = layer;
    spec.stride = stride;
    return spec;
}

}  // namespace

StagePlan named_scheme(const std::string& name, SchemeScale scale, int n_layers) {
    if (n_layers < 1) throw std::invalid_argument("named_scheme: n_layers must be >= 1");
    const int shallow = std::min(2, n_layers);
    const int deep = scale == SchemeScale::paper ? 16 : std::max(1, n_layers / 2);
    if (scale == SchemeScale::paper && n_layers < 16) {
        throw std::invalid_argument("named_scheme: paper scale needs >= 16 layers");
    }

    StagePlan plan;
    plan.name = name;
    if (name == "single") {
        plan.stages = {{1.0, CompressorSpec{}}};
    } else if (name == "two") {
        plan.stages = {{0.5, pool_spec(shallow, 8)}, {0.5, CompressorSpec{}}};
    } else if (name == "three-deeper") {
        plan.stages = {{1.0 / 3.0, pool_spec(shallow, 8)},
                       {1.0 / 3.0, pool_spec(deep, 8)},
                       {1.0 / 3.0, CompressorSpec{}}};
    } else if (name == "three-wider") {
        plan.stages = {{1.0 / 3.0, pool_spec(shallow, 8)},
                       {1.0 / 3.0, pool_spec(shallow, 2)},
                       {1.0 / 3.0, CompressorSpec{}}};
    } else if (name == "four-wider-then-deeper") {
        plan.stages = {{0.25, pool_spec(shallow, 8)},
                       {0.25, pool_spec(shallow, 2)},
                       {0.25, pool_spec(deep, 2)},
                       {0.25, CompressorSpec{}}};
    } else if (name == "four-deeper-then-wider") {
        plan.stages = {{0.25, pool_spec(shallow, 8)},
                       {0.25, pool_spec(deep, 8)},
                       {0.25, pool_spec(deep, 2)},
                       {0.25, CompressorSpec{}}};
    } else {
        std::string known;
        for (const auto& n : kSchemeNames) known += (known.empty() ? "" : ", ") + n;
        throw std::invalid_argument("unknown scheme '" + name + "' (known: " + known + ")");
    }
    plan.validate();
    return plan;
}

std::vector<long long> split_steps(long long total_steps, const StagePlan& plan) {
    plan.validate();
    long long required = 0;
    for (const auto& s : plan.stages) {
        if (s.fraction > 0.0) ++required;
    }
    if (total_steps < required) {
        throw std::invalid_argument("split_steps: " + std::to_string(total_steps) +
                                    " steps cannot cover " + std::to_string(required) +
                                    " nonzero stages");
    }
    const size_t n = plan.stages.size();
    std::vector<long long> counts(n, 0);
    long long used = 0;
    for (size_t i = 0; i < n; ++i) {
        // The epsilon keeps exact splits (e.g. thirds) from flooring down.
        counts[i] = static_cast<long long>(
            std::floor(static_cast<double>(total_steps) * plan.stages[i].fraction + 1e-9));
        used += counts[i];
    }
    counts[n - 1] += total_steps - used;  // remainder to the final stage
    // Every stage with positive fraction runs at least one step.
    for (size_t i = 0; i < n; ++i) {
        if (plan.stages[i].fraction <= 0.0 || counts[i] >= 1) continue;
        size_t donor = n;
        long long best = 1;
        for (size_t j = 0; j < n; ++j) {
            if (counts[j] > best) {
                best = counts[j];
                donor = j;
            }
        }
        if (donor == n) throw std::logic_error("split_steps: no donor stage");
        --counts[donor];
        counts[i] = 1;
    }
    return counts;
}

const CompressorSpec& spec_at_step(const StagePlan& plan, long long step, long long total_steps) {
    if (step < 0 || step >= total_steps) {
        throw std::out_of_range("spec_at_step: step " + std::to_string(step) + " outside [0, " +
                                std::to_string(total_steps) + ")");
    }
    const auto counts = split_steps(total_steps, plan);
    long long begin = 0;
    for (size_t i = 0; i < counts.size(); ++i) {
        const long long end = begin + counts[i];
        if (step >= begin && step < end) return plan.stages[i].spec;
        begin = end;
    }
    throw std::logic_error("spec_at_step: step not covered by any stage");
}

}  // namespace vclab
