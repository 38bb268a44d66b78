#include "vclab/accounting.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "vclab/compressor.hpp"
#include "vclab/model.hpp"
#include "vclab/schedule.hpp"

#include "json.hpp"

namespace vclab {

long long Ratio::percent() const {
    if (den == 0) throw std::logic_error("Ratio::percent: zero denominator");
    long long n = 100 * num, d = den;
    if (d < 0) {
        n = -n;
        d = -d;
    }
    if (n >= 0) return (2 * n + d) / (2 * d);
    return -((2 * (-n) + d) / (2 * d));
}

namespace {

void check_args(int n_layers, int visual_len, int layer, int stride) {
    if (n_layers < 1) throw std::invalid_argument("accounting: n_layers must be >= 1");
    if (visual_len < 1) throw std::invalid_argument("accounting: visual_len must be >= 1");
    if (stride < 1) throw std::invalid_argument("accounting: stride must be >= 1");
    if (layer < 1 || layer > n_layers) {
        throw std::invalid_argument("accounting: layer " + std::to_string(layer) +
                                    " outside [1, " + std::to_string(n_layers) + "]");
    }
}

long long gcd_ll(long long a, long long b) {
    while (b != 0) {
        long long t = a % b;
        a = b;
        b = t;
    }
    return a;
}

}  // namespace

long long token_total(int n_layers, int visual_len, int layer, int stride) {
    check_args(n_layers, visual_len, layer, stride);
    const long long l_out = output_len(visual_len, stride);
    return static_cast<long long>(layer) * visual_len +
           static_cast<long long>(n_layers - layer) * l_out;
}

Ratio compression_ratio(int n_layers, int visual_len, int layer, int stride) {
    const long long total = token_total(n_layers, visual_len, layer, stride);
    long long base = static_cast<long long>(n_layers) * visual_len;
    const long long g = gcd_ll(base, total);
    return Ratio{base / g, total / g};
}

PlanAverage plan_average(const StagePlan& plan, int n_layers, int visual_len) {
    double frac_sum = 0.0;
    for (const auto& s : plan.stages) frac_sum += s.fraction;
    if (std::abs(frac_sum - 1.0) > 1e-9) {
        throw std::invalid_argument("plan_average: stage fractions sum to " +
                                    std::to_string(frac_sum) + ", expected 1");
    }
    const double base = static_cast<double>(n_layers) * visual_len;
    PlanAverage out;
    for (const auto& s : plan.stages) {
        long long tokens;
        if (s.spec.is_identity()) {
            tokens = static_cast<long long>(n_layers) * visual_len;
        } else {
            tokens = token_total(n_layers, visual_len, s.spec.layer, s.spec.stride);
        }
        out.avg_tokens += s.fraction * static_cast<double>(tokens);
    }
    out.avg_cr_percent = 100.0 * base / out.avg_tokens;
    return out;
}

double flops_forward(int d_model, int vocab_size, const std::vector<long long>& lengths) {
    if (lengths.empty()) throw std::invalid_argument("flops_forward: no layer lengths");
    const double d = static_cast<double>(d_model);
    double total = 0.0;
    for (long long t : lengths) {
        if (t <= 0) throw std::invalid_argument("flops_forward: lengths must be positive");
        const double td = static_cast<double>(t);
        total += 24.0 * td * d * d + 4.0 * td * td * d;
    }
    total += 2.0 * static_cast<double>(lengths.back()) * d * static_cast<double>(vocab_size);
    return total;
}

double flops_train_step(int d_model, int vocab_size, const std::vector<long long>& lengths) {
    return 3.0 * flops_forward(d_model, vocab_size, lengths);
}

long long param_count(const ModelConfig& c) {
    const long long d = c.d_model;
    const long long per_layer = 4 * d * d                      // attention projections
                                + 2 * d * c.d_ff               // feed-forward up/down
                                + 2 * d;                       // two RMS norm gains
    return c.vocab_size * d                                    // token embeddings
           + static_cast<long long>(c.max_seq) * d             // position embeddings
           + static_cast<long long>(c.n_attrs) * c.d_patch     // frozen patch table
           + static_cast<long long>(c.d_patch) * d             // visual projection
           + c.n_layers * per_layer + d                        // final norm gain
           + d * c.vocab_size;                                 // output head
}

std::vector<long long> per_layer_lengths(int n_layers, long long seq_len, int visual_len,
                                         int layer, int stride) {
    if (n_layers < 1) throw std::invalid_argument("per_layer_lengths: n_layers must be >= 1");
    std::vector<long long> out(static_cast<size_t>(n_layers), seq_len);
    if (layer == 0 || stride == 1) return out;
    check_args(n_layers, visual_len, layer, stride);
    const long long shrunk = seq_len - visual_len + output_len(visual_len, stride);
    for (int i = layer; i < n_layers; ++i) out[static_cast<size_t>(i)] = shrunk;
    return out;
}

std::string ComputeReport::to_text() const {
    std::ostringstream os;
    os << "tokens=" << tokens << " cr=" << cr.percent() << "%\n";
    os << "  N=" << n_layers << " L=" << visual_len << " K=" << layer << " S=" << stride
       << " (uncompressed tokens " << tokens_base << ")\n";
    os << "  cr exact = " << cr.num << "/" << cr.den << "\n";
    os << "  flops_forward=" << flops << " (uncompressed " << flops_base << ")\n";
    return os.str();
}

std::string ComputeReport::to_json() const {
    nlohmann::json j;
    j["n_layers"] = n_layers;
    j["visual_len"] = visual_len;
    j["layer"] = layer;
    j["stride"] = stride;
    j["tokens"] = tokens;
    j["tokens_uncompressed"] = tokens_base;
    j["cr_num"] = cr.num;
    j["cr_den"] = cr.den;
    j["cr_percent"] = cr.percent();
    j["flops_forward"] = flops;
    j["flops_forward_uncompressed"] = flops_base;
    return j.dump();
}

ComputeReport compute_report(int n_layers, int visual_len, int layer, int stride, int d_model,
                             int vocab_size, int text_len) {
    ComputeReport r;
    r.n_layers = n_layers;
    r.visual_len = visual_len;
    r.layer = layer;
    r.stride = stride;
    r.tokens = token_total(n_layers, visual_len, layer, stride);
    r.tokens_base = static_cast<long long>(n_layers) * visual_len;
    r.cr = compression_ratio(n_layers, visual_len, layer, stride);
    const long long seq = static_cast<long long>(text_len) + visual_len;
    r.flops = flops_forward(d_model, vocab_size,
                            per_layer_lengths(n_layers, seq, visual_len, layer, stride));
    r.flops_base = flops_forward(d_model, vocab_size,
                                 per_layer_lengths(n_layers, seq, visual_len, layer, 1));
    return r;
}

}  // namespace vclab
