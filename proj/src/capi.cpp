#include "vclab.h"

#include <cstring>
#include <new>
#include <stdexcept>
#include <string>

#include "vclab/accounting.hpp"
#include "vclab/model.hpp"
#include "vclab/runconfig.hpp"
#include "vclab/schedule.hpp"
#include "vclab/textio.hpp"
#include "vclab/trainer.hpp"

#include "json.hpp"

struct vclab_model {
    vclab::Model model;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

// Maps C++ failures onto the C error codes; anything filesystem-flavored
// reports as IO.
template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return VCLAB_OK;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        return VCLAB_ERR_INVALID;
    } catch (const std::out_of_range& e) {
        g_last_error = e.what();
        return VCLAB_ERR_INVALID;
    } catch (const std::runtime_error& e) {
        g_last_error = e.what();
        const std::string msg = e.what();
        if (msg.find("cannot open") != std::string::npos ||
            msg.find("write failed") != std::string::npos) {
            return VCLAB_ERR_IO;
        }
        return VCLAB_ERR_RUNTIME;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return VCLAB_ERR_RUNTIME;
    }
}

int require(bool ok, const char* what) {
    if (ok) return VCLAB_OK;
    g_last_error = what;
    return VCLAB_ERR_INVALID;
}

std::vector<std::string> override_vector(const char* const* overrides, size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        if (!overrides[i]) throw std::invalid_argument("null override at index " + std::to_string(i));
        out.emplace_back(overrides[i]);
    }
    return out;
}

int run_command(const char* config_path, const char* const* overrides, size_t n_overrides,
                char** out_dir, std::string (*command)(vclab::LabConfig)) {
    if (int rc = require(config_path != nullptr, "config path is null")) return rc;
    if (int rc = require(out_dir != nullptr, "out_dir is null")) return rc;
    if (int rc = require(n_overrides == 0 || overrides != nullptr, "overrides is null")) return rc;
    return guarded([&] {
        vclab::LabConfig cfg = vclab::LabConfig::parse_file(config_path);
        for (const auto& ov : override_vector(overrides, n_overrides)) cfg.apply_override(ov);
        *out_dir = dup_string(command(std::move(cfg)));
    });
}

}  // namespace

extern "C" {

const char* vclab_version(void) { return "vclab 1.0.0"; }

const char* vclab_last_error(void) { return g_last_error.c_str(); }

void vclab_string_free(char* s) { delete[] s; }

int vclab_token_total(int n_layers, int visual_len, int layer, int stride,
                      long long* out_tokens) {
    if (int rc = require(out_tokens != nullptr, "out_tokens is null")) return rc;
    return guarded([&] { *out_tokens = vclab::token_total(n_layers, visual_len, layer, stride); });
}

int vclab_compression_ratio(int n_layers, int visual_len, int layer, int stride,
                            long long* out_num, long long* out_den, long long* out_percent) {
    if (int rc = require(out_num && out_den && out_percent, "ratio out-params are null")) return rc;
    return guarded([&] {
        const auto r = vclab::compression_ratio(n_layers, visual_len, layer, stride);
        *out_num = r.num;
        *out_den = r.den;
        *out_percent = r.percent();
    });
}

int vclab_crcalc_report(int n_layers, int visual_len, int layer, int stride, int d_model,
                        int vocab_size, int text_len, int as_json, char** out_text) {
    if (int rc = require(out_text != nullptr, "out_text is null")) return rc;
    return guarded([&] {
        const auto report = vclab::compute_report(n_layers, visual_len, layer, stride, d_model,
                                                  vocab_size, text_len);
        *out_text = dup_string(as_json ? report.to_json() : report.to_text());
    });
}

int vclab_scheme_report(const char* name, int n_layers, int visual_len, int paper_scale,
                        int as_json, char** out_text) {
    if (int rc = require(name != nullptr, "scheme name is null")) return rc;
    if (int rc = require(out_text != nullptr, "out_text is null")) return rc;
    return guarded([&] {
        const auto plan = vclab::named_scheme(
            name, paper_scale ? vclab::SchemeScale::paper : vclab::SchemeScale::desk, n_layers);
        const auto avg = vclab::plan_average(plan, n_layers, visual_len);
        if (as_json) {
            nlohmann::json j;
            j["scheme"] = plan.name;
            j["stages"] = nlohmann::json::array();
            for (const auto& st : plan.stages) {
                nlohmann::json sj;
                sj["fraction"] = st.fraction;
                sj["spec"] = st.spec.to_string();
                if (st.spec.is_identity()) {
                    sj["cr_percent"] = 100;
                    sj["tokens"] = static_cast<long long>(n_layers) * visual_len;
                } else {
                    sj["cr_percent"] =
                        vclab::compression_ratio(n_layers, visual_len, st.spec.layer,
                                                 st.spec.stride).percent();
                    sj["tokens"] =
                        vclab::token_total(n_layers, visual_len, st.spec.layer, st.spec.stride);
                }
                j["stages"].push_back(sj);
            }
            j["avg_tokens"] = avg.avg_tokens;
            j["avg_cr_percent"] = avg.avg_cr_percent;
            j["note"] = "stage average is the arithmetic mean; reported stage-averaged token "
                        "counts use an unspecified averaging and do not reconcile";
            *out_text = dup_string(j.dump());
            return;
        }
        std::string text = "scheme=" + plan.name + " N=" + std::to_string(n_layers) +
                           " L=" + std::to_string(visual_len) + "\n";
        for (size_t i = 0; i < plan.stages.size(); ++i) {
            const auto& st = plan.stages[i];
            text += "stage " + std::to_string(i + 1) + ": ";
            if (st.spec.is_identity()) {
                text += "no compression, cr=100%, tokens=" +
                        std::to_string(static_cast<long long>(n_layers) * visual_len);
            } else {
                text += "K=" + std::to_string(st.spec.layer) +
                        " S=" + std::to_string(st.spec.stride) + ", cr=" +
                        std::to_string(vclab::compression_ratio(n_layers, visual_len,
                                                                st.spec.layer, st.spec.stride)
                                           .percent()) +
                        "%, tokens=" +
                        std::to_string(vclab::token_total(n_layers, visual_len, st.spec.layer,
                                                          st.spec.stride));
            }
            text += ", fraction=" + vclab::fmt_double(st.fraction) + "\n";
        }
        text += "average: tokens=" + vclab::fmt_double(avg.avg_tokens) +
                " cr=" + vclab::fmt_double(avg.avg_cr_percent) + "%\n";
        text += "note: arithmetic mean across stages; reported stage-averaged token counts "
                "use an unspecified averaging and do not reconcile\n";
        *out_text = dup_string(text);
    });
}

int vclab_config_render(const char* config_path, const char* const* overrides, size_t n_overrides,
                        char** out_echo) {
    if (int rc = require(config_path != nullptr, "config path is null")) return rc;
    if (int rc = require(out_echo != nullptr, "out_echo is null")) return rc;
    if (int rc = require(n_overrides == 0 || overrides != nullptr, "overrides is null")) return rc;
    return guarded([&] {
        vclab::LabConfig cfg = vclab::LabConfig::parse_file(config_path);
        for (const auto& ov : override_vector(overrides, n_overrides)) cfg.apply_override(ov);
        *out_echo = dup_string(cfg.echo());
    });
}

int vclab_cmd_gen_data(const char* config_path, const char* const* overrides, size_t n_overrides,
                       char** out_dir) {
    return run_command(config_path, overrides, n_overrides, out_dir, vclab::cmd_gen_data);
}

int vclab_cmd_train(const char* config_path, const char* const* overrides, size_t n_overrides,
                    char** out_dir) {
    return run_command(config_path, overrides, n_overrides, out_dir, vclab::cmd_train);
}

int vclab_cmd_eval(const char* config_path, const char* const* overrides, size_t n_overrides,
                   char** out_dir) {
    return run_command(config_path, overrides, n_overrides, out_dir, vclab::cmd_eval);
}

int vclab_cmd_sweep(const char* config_path, const char* const* overrides, size_t n_overrides,
                    char** out_dir) {
    return run_command(config_path, overrides, n_overrides, out_dir, vclab::cmd_sweep);
}

int vclab_cmd_probe(const char* config_path, const char* const* overrides, size_t n_overrides,
                    char** out_dir) {
    return run_command(config_path, overrides, n_overrides, out_dir, vclab::cmd_probe);
}

int vclab_model_load(const char* checkpoint_path, vclab_model** out_model) {
    if (int rc = require(checkpoint_path != nullptr, "checkpoint path is null")) return rc;
    if (int rc = require(out_model != nullptr, "out_model is null")) return rc;
    return guarded([&] {
        auto* handle = new vclab_model{vclab::load_checkpoint(checkpoint_path)};
        *out_model = handle;
    });
}

void vclab_model_free(vclab_model* model) { delete model; }

int vclab_model_param_count(const vclab_model* model, long long* out_count) {
    if (int rc = require(model != nullptr, "model handle is null")) return rc;
    if (int rc = require(out_count != nullptr, "out_count is null")) return rc;
    return guarded([&] { *out_count = model->model.parameter_count(); });
}

int vclab_model_config_json(const vclab_model* model, char** out_json) {
    if (int rc = require(model != nullptr, "model handle is null")) return rc;
    if (int rc = require(out_json != nullptr, "out_json is null")) return rc;
    return guarded([&] {
        const auto& c = model->model.config;
        nlohmann::json j;
        j["n_layers"] = c.n_layers;
        j["d_model"] = c.d_model;
        j["n_heads"] = c.n_heads;
        j["d_ff"] = c.d_ff;
        j["vocab_size"] = c.vocab_size;
        j["max_seq"] = c.max_seq;
        j["visual_len"] = c.visual_len;
        j["d_patch"] = c.d_patch;
        j["n_attrs"] = c.n_attrs;
        j["seed"] = model->model.seed;
        *out_json = dup_string(j.dump());
    });
}

int vclab_model_evaluate(const vclab_model* model, const char* dataset_path, const char* spec,
                         int max_samples, char** out_json) {
    if (int rc = require(model != nullptr, "model handle is null")) return rc;
    if (int rc = require(dataset_path != nullptr, "dataset path is null")) return rc;
    if (int rc = require(spec != nullptr, "spec is null")) return rc;
    if (int rc = require(out_json != nullptr, "out_json is null")) return rc;
    return guarded([&] {
        const auto samples = vclab::read_jsonl(dataset_path);
        vclab::EvalOptions opts;
        opts.max_samples = max_samples;
        const auto parsed = vclab::CompressorSpec::parse(spec);
        vclab::EvalRecord rec{0, parsed.to_string(), true,
                              vclab::evaluate(model->model, samples, parsed, opts)};
        *out_json = dup_string(vclab::eval_record_json(rec));
    });
}

}  // extern "C"
