#include "vclab/diagnostics.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "vclab/accounting.hpp"
#include "vclab/textio.hpp"

namespace vclab {

std::vector<SweepPoint> compression_sweep(const Model& model, const std::vector<QASample>& samples,
                                          const std::vector<int>& layers,
                                          const std::vector<int>& strides,
                                          const EvalOptions& options) {
    if (samples.empty()) throw std::invalid_argument("compression_sweep: empty dataset");
    if (layers.empty() || strides.empty()) {
        throw std::invalid_argument("compression_sweep: empty layer or stride list");
    }
    const int N = model.config.n_layers;
    const int L = model.config.visual_len;
    std::vector<SweepPoint> points;
    points.reserve(layers.size() * strides.size());
    for (int k : layers) {
        for (int s : strides) {
            SweepPoint p;
            p.layer = k;
            p.stride = s;
            p.tokens = token_total(N, L, k, s);
            p.cr_pct = 100.0 * compression_ratio(N, L, k, s).value();
            p.retained_pct = 100.0 * static_cast<double>(p.tokens) /
                             (static_cast<double>(N) * L);
            p.degenerate = k == N && s > 1;
            CompressorSpec spec;
            spec.kind = s == 1 ? CompressorKind::identity : CompressorKind::avg_pool;
            spec.layer = k;
            spec.stride = s;
            p.accuracy = evaluate(model, samples, spec, options).overall;
            points.push_back(p);
        }
    }
    std::stable_sort(points.begin(), points.end(), [](const SweepPoint& a, const SweepPoint& b) {
        if (a.retained_pct != b.retained_pct) return a.retained_pct < b.retained_pct;
        if (a.layer != b.layer) return a.layer < b.layer;
        return a.stride < b.stride;
    });
    return points;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
    std::ostringstream os;
    os << "# vclab sweep v1: retained_pct normalizes layer-summed visual tokens by N*L\n";
    os << "K,S,retained_pct,cr_pct,tokens,accuracy\n";
    bool any_degenerate = false;
    for (const auto& p : points) {
        os << p.layer << ',' << p.stride << ',' << fmt_double(p.retained_pct) << ','
           << fmt_double(p.cr_pct) << ',' << p.tokens << ',' << fmt_double(p.accuracy) << '\n';
        any_degenerate = any_degenerate || p.degenerate;
    }
    if (any_degenerate) {
        os << "# note: K=N rows are degenerate (compression after the last layer leaves "
              "all layers full-length)\n";
    }
    return os.str();
}

AttentionProfile attention_probe(const Model& model, const std::vector<QASample>& samples,
                                 int max_samples, int system_len) {
    if (samples.empty()) throw std::invalid_argument("attention_probe: empty dataset");
    const size_t limit = max_samples > 0
                             ? std::min(samples.size(), static_cast<size_t>(max_samples))
                             : samples.size();
    const int N = model.config.n_layers;
    const int H = model.config.n_heads;

    AttentionProfile prof;
    prof.visual_mass.assign(static_cast<size_t>(N), 0.0);
    prof.system_mass.assign(static_cast<size_t>(N), 0.0);
    prof.n_samples = static_cast<long long>(limit);

    for (size_t i = 0; i < limit; ++i) {
        const RoleTaggedSequence seq =
            render_sequence(samples[i], system_len, model.config.max_seq);
        bool has_system = false;
        int ans = -1;
        for (int t = 0; t < seq.length(); ++t) {
            has_system = has_system || seq.roles[static_cast<size_t>(t)] == Role::system;
            if (ans < 0 && seq.roles[static_cast<size_t>(t)] == Role::answer) ans = t;
        }
        if (!has_system) {
            throw std::invalid_argument("attention_probe: sample " + std::to_string(i) +
                                        " has no system span");
        }
        if (ans < 0) {
            throw std::invalid_argument("attention_probe: sample " + std::to_string(i) +
                                        " has no answer position");
        }

        NoGradGuard no_grad;
        ForwardResult fr = forward(model, seq, CompressorSpec{}, /*capture=*/true);
        const auto& cap = *fr.capture;
        for (int l = 0; l < N; ++l) {
            double vis = 0.0, sys = 0.0;
            for (int h = 0; h < H; ++h) {
                for (int t = 0; t < seq.length(); ++t) {
                    const double w = cap.at(l, 0, h, ans, t);
                    if (seq.roles[static_cast<size_t>(t)] == Role::visual) vis += w;
                    if (seq.roles[static_cast<size_t>(t)] == Role::system) sys += w;
                }
            }
            prof.visual_mass[static_cast<size_t>(l)] += vis / H;
            prof.system_mass[static_cast<size_t>(l)] += sys / H;
        }
    }
    for (auto& v : prof.visual_mass) v /= static_cast<double>(limit);
    for (auto& v : prof.system_mass) v /= static_cast<double>(limit);
    return prof;
}

std::string profile_csv(const AttentionProfile& profile) {
    std::ostringstream os;
    os << "# vclab attn_profile v1: mean attention mass from the first answer position\n";
    os << "layer,visual_mass,system_mass\n";
    for (size_t l = 0; l < profile.visual_mass.size(); ++l) {
        os << (l + 1) << ',' << fmt_double(profile.visual_mass[l]) << ','
           << fmt_double(profile.system_mass[l]) << '\n';
    }
    return os.str();
}

}  // namespace vclab
