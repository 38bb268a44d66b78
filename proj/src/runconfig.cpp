#include "vclab/runconfig.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "vclab/diagnostics.hpp"
#include "vclab/textio.hpp"

#include "json.hpp"

namespace vclab {

namespace {

long long to_ll(const std::string& key, const std::string& v) {
    long long out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw std::invalid_argument("config: " + key + " wants an integer, got '" + v + "'");
    }
    return out;
}

uint64_t to_u64(const std::string& key, const std::string& v) {
    uint64_t out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw std::invalid_argument("config: " + key + " wants an unsigned integer, got '" + v +
                                    "'");
    }
    return out;
}

int to_i(const std::string& key, const std::string& v) {
    return static_cast<int>(to_ll(key, v));
}

double to_d(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: " + key + " wants a number, got '" + v + "'");
    }
}

std::string unquote(const std::string& key, const std::string& v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
        return v.substr(1, v.size() - 2);
    }
    if (!v.empty() && (v.front() == '"' || v.back() == '"')) {
        throw std::invalid_argument("config: " + key + " has unbalanced quotes");
    }
    return v;
}

std::string quote(const std::string& v) { return '"' + v + '"'; }

// Key dispatch table: one setter and one renderer per key.
struct Field {
    std::function<void(LabConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const LabConfig&)> render;
};

using FieldMap = std::map<std::string, std::map<std::string, Field>>;

const FieldMap& fields() {
    static const FieldMap table = [] {
        FieldMap m;
        auto add = [&m](const std::string& sec, const std::string& key, auto setter,
                        auto renderer) {
            m[sec][key] = Field{setter, renderer};
        };

#define VCLAB_INT_FIELD(sec, key, expr)                                                      \
    add(sec, key, [](LabConfig& c, const std::string& k, const std::string& v) { expr = to_i(k, v); }, \
        [](const LabConfig& c) { return std::to_string(expr); })
#define VCLAB_LL_FIELD(sec, key, expr)                                                       \
    add(sec, key, [](LabConfig& c, const std::string& k, const std::string& v) { expr = to_ll(k, v); }, \
        [](const LabConfig& c) { return std::to_string(expr); })
#define VCLAB_U64_FIELD(sec, key, expr)                                                      \
    add(sec, key, [](LabConfig& c, const std::string& k, const std::string& v) { expr = to_u64(k, v); }, \
        [](const LabConfig& c) { return std::to_string(expr); })
#define VCLAB_DBL_FIELD(sec, key, expr)                                                      \
    add(sec, key, [](LabConfig& c, const std::string& k, const std::string& v) { expr = to_d(k, v); }, \
        [](const LabConfig& c) { return fmt_double(expr); })
#define VCLAB_STR_FIELD(sec, key, expr)                                                      \
    add(sec, key,                                                                            \
        [](LabConfig& c, const std::string& k, const std::string& v) { expr = unquote(k, v); }, \
        [](const LabConfig& c) { return quote(expr); })

        VCLAB_INT_FIELD("model", "n_layers", c.model.n_layers);
        VCLAB_INT_FIELD("model", "d_model", c.model.d_model);
        VCLAB_INT_FIELD("model", "n_heads", c.model.n_heads);
        VCLAB_INT_FIELD("model", "d_ff", c.model.d_ff);
        VCLAB_INT_FIELD("model", "vocab_size", c.model.vocab_size);
        VCLAB_INT_FIELD("model", "max_seq", c.model.max_seq);
        VCLAB_INT_FIELD("model", "visual_len", c.model.visual_len);
        VCLAB_INT_FIELD("model", "d_patch", c.model.d_patch);
        VCLAB_INT_FIELD("model", "n_attrs", c.model.n_attrs);

        VCLAB_STR_FIELD("data", "train", c.data.train);
        VCLAB_STR_FIELD("data", "eval", c.data.eval);
        VCLAB_STR_FIELD("data", "checkpoint", c.data.checkpoint);
        VCLAB_STR_FIELD("data", "out_root", c.data.out_root);
        VCLAB_U64_FIELD("data", "gen_seed", c.data.gen_seed);
        VCLAB_INT_FIELD("data", "n_train", c.data.n_train);
        VCLAB_INT_FIELD("data", "n_eval", c.data.n_eval);
        VCLAB_INT_FIELD("data", "grid", c.data.grid);
        VCLAB_INT_FIELD("data", "attrs", c.data.attrs);
        VCLAB_DBL_FIELD("data", "redundancy", c.data.redundancy);
        VCLAB_STR_FIELD("data", "kinds", c.data.kinds);

        VCLAB_STR_FIELD("plan", "scheme", c.plan.scheme);
        VCLAB_STR_FIELD("plan", "stages", c.plan.stages);

        VCLAB_LL_FIELD("training", "steps", c.training.steps);
        VCLAB_INT_FIELD("training", "batch", c.training.batch);
        VCLAB_DBL_FIELD("training", "lr", c.training.lr);
        VCLAB_DBL_FIELD("training", "warmup", c.training.warmup);
        VCLAB_LL_FIELD("training", "eval_every", c.training.eval_every);
        VCLAB_INT_FIELD("training", "eval_samples", c.training.eval_samples);
        VCLAB_INT_FIELD("training", "final_eval_samples", c.training.final_eval_samples);
        VCLAB_INT_FIELD("training", "eval_batch", c.training.eval_batch);
        VCLAB_INT_FIELD("training", "max_new", c.training.max_new);
        VCLAB_INT_FIELD("training", "system_len", c.training.system_len);
        VCLAB_U64_FIELD("training", "model_seed", c.training.model_seed);
        VCLAB_U64_FIELD("training", "data_seed", c.training.data_seed);

        VCLAB_STR_FIELD("diagnostics", "ks", c.diagnostics.ks);
        VCLAB_STR_FIELD("diagnostics", "ss", c.diagnostics.ss);
        VCLAB_INT_FIELD("diagnostics", "sweep_samples", c.diagnostics.sweep_samples);
        VCLAB_INT_FIELD("diagnostics", "probe_samples", c.diagnostics.probe_samples);
        VCLAB_STR_FIELD("diagnostics", "eval_spec", c.diagnostics.eval_spec);
        VCLAB_INT_FIELD("diagnostics", "eval_samples", c.diagnostics.eval_samples);

#undef VCLAB_INT_FIELD
#undef VCLAB_LL_FIELD
#undef VCLAB_U64_FIELD
#undef VCLAB_DBL_FIELD
#undef VCLAB_STR_FIELD
        return m;
    }();
    return table;
}

const std::vector<std::string>& section_order() {
    static const std::vector<std::string> order = {"model", "data", "plan", "training",
                                                   "diagnostics"};
    return order;
}

const std::vector<std::string>& key_order(const std::string& section) {
    static const std::map<std::string, std::vector<std::string>> order = {
        {"model",
         {"n_layers", "d_model", "n_heads", "d_ff", "vocab_size", "max_seq", "visual_len",
          "d_patch", "n_attrs"}},
        {"data",
         {"train", "eval", "checkpoint", "out_root", "gen_seed", "n_train", "n_eval", "grid",
          "attrs", "redundancy", "kinds"}},
        {"plan", {"scheme", "stages"}},
        {"training",
         {"steps", "batch", "lr", "warmup", "eval_every", "eval_samples", "final_eval_samples",
          "eval_batch", "max_new", "system_len", "model_seed", "data_seed"}},
        {"diagnostics",
         {"ks", "ss", "sweep_samples", "probe_samples", "eval_spec", "eval_samples"}},
    };
    return order.at(section);
}

void set_field(LabConfig& cfg, const std::string& section, const std::string& key,
               const std::string& value) {
    const auto sec_it = fields().find(section);
    if (sec_it == fields().end()) {
        throw std::invalid_argument("config: unknown section [" + section + "]");
    }
    const auto key_it = sec_it->second.find(key);
    if (key_it == sec_it->second.end()) {
        throw std::invalid_argument("config: unknown key '" + key + "' in [" + section + "]");
    }
    key_it->second.set(cfg, section + "." + key, value);
}

}  // namespace

std::string LabConfig::echo() const {
    std::ostringstream os;
    for (const auto& section : section_order()) {
        os << '[' << section << "]\n";
        for (const auto& key : key_order(section)) {
            os << key << " = " << fields().at(section).at(key).render(*this) << '\n';
        }
        os << '\n';
    }
    return os.str();
}

std::string LabConfig::run_id() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(echo())));
    return std::string(buf).substr(0, 12);
}

LabConfig LabConfig::parse_text(const std::string& text) {
    LabConfig cfg;
    std::istringstream is(text);
    std::string line, section;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (fields().find(section) == fields().end()) {
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        }
        if (section.empty()) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": key outside any section");
        }
        set_field(cfg, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

LabConfig LabConfig::parse_file(const std::string& path) {
    return parse_text(read_text_file(path));
}

void LabConfig::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
        throw std::invalid_argument("override '" + assignment + "' wants section.key=value");
    }
    set_field(*this, trim(assignment.substr(0, dot)),
              trim(assignment.substr(dot + 1, eq - dot - 1)), trim(assignment.substr(eq + 1)));
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (const auto& part : split(text, ',')) {
        const auto item = trim(part);
        if (item.empty()) continue;
        out.push_back(to_i("list", item));
    }
    if (out.empty()) throw std::invalid_argument("empty integer list '" + text + "'");
    return out;
}

StagePlan LabConfig::stage_plan() const {
    if (!plan.stages.empty()) {
        StagePlan p;
        p.name = "custom";
        for (const auto& part : split(plan.stages, ';')) {
            const auto item = trim(part);
            if (item.empty()) continue;
            const auto bits = split(item, ':');
            Stage st;
            if (bits.size() == 2 && bits[0] == "identity") {
                st.fraction = to_d("plan.stages", bits[1]);
            } else if (bits.size() == 4) {
                st.spec.kind = kind_from_name(bits[0]);
                st.spec.layer = to_i("plan.stages", bits[1]);
                st.spec.stride = to_i("plan.stages", bits[2]);
                st.fraction = to_d("plan.stages", bits[3]);
            } else {
                throw std::invalid_argument("plan stage '" + item +
                                            "' wants kind:layer:stride:fraction or identity:fraction");
            }
            p.stages.push_back(st);
        }
        p.validate();
        return p;
    }
    return named_scheme(plan.scheme, SchemeScale::desk, model.n_layers);
}

RunConfig LabConfig::run_config(const std::string& out_dir) const {
    RunConfig run;
    run.model = model;
    run.train_path = data.train;
    run.eval_path = data.eval;
    run.plan = stage_plan();
    run.total_steps = training.steps;
    run.batch_size = training.batch;
    run.lr_peak = training.lr;
    run.warmup_frac = training.warmup;
    run.eval_every = training.eval_every;
    run.eval_max_samples = training.eval_samples;
    run.final_eval_max_samples = training.final_eval_samples;
    run.eval_batch = training.eval_batch;
    run.max_new = training.max_new;
    run.system_len = training.system_len;
    run.model_seed = training.model_seed;
    run.data_seed = training.data_seed;
    run.out_dir = out_dir;
    return run;
}

namespace {

std::string resolve_out_dir(const LabConfig& cfg, const std::string& command) {
    std::string root = cfg.data.out_root;
    if (const char* env = std::getenv("VCLAB_OUT_ROOT")) {
        if (*env) root = env;
    }
    const std::string dir = root + "/" + command + "-" + cfg.run_id();
    std::filesystem::create_directories(dir);
    return dir;
}

void write_echo(const LabConfig& cfg, const std::string& dir) {
    write_text_file(dir + "/effective.toml", cfg.echo());
}

std::vector<QuestionKind> parse_kinds(const std::string& text) {
    std::vector<QuestionKind> kinds;
    for (const auto& part : split(text, ',')) {
        const auto item = trim(part);
        if (!item.empty()) kinds.push_back(kind_from_label(item));
    }
    if (kinds.empty()) throw std::invalid_argument("config: data.kinds is empty");
    return kinds;
}

}  // namespace

std::string cmd_gen_data(LabConfig cfg) {
    const std::string dir = resolve_out_dir(cfg, "gen-data");
    write_echo(cfg, dir);

    DatasetParams params;
    params.grid_side = cfg.data.grid;
    params.n_attrs = cfg.data.attrs;
    params.redundancy = cfg.data.redundancy;
    params.kinds = parse_kinds(cfg.data.kinds);

    // Disjoint seed streams per split.
    params.split = "train";
    params.n_samples = cfg.data.n_train;
    const auto train = gen_dataset(fnv1a64("train:" + std::to_string(cfg.data.gen_seed)), params);
    params.split = "eval";
    params.n_samples = cfg.data.n_eval;
    const auto eval = gen_dataset(fnv1a64("eval:" + std::to_string(cfg.data.gen_seed)), params);

    write_jsonl(dir + "/train.jsonl", train);
    write_jsonl(dir + "/eval.jsonl", eval);

    nlohmann::json summary;
    summary["n_train"] = train.size();
    summary["n_eval"] = eval.size();
    summary["grid"] = cfg.data.grid;
    summary["attrs"] = cfg.data.attrs;
    summary["redundancy"] = cfg.data.redundancy;
    summary["gen_seed"] = cfg.data.gen_seed;
    write_text_file(dir + "/summary.json", summary.dump() + "\n");
    return dir;
}

std::string cmd_train(LabConfig cfg) {
    const std::string dir = resolve_out_dir(cfg, "train");
    write_echo(cfg, dir);
    train(cfg.run_config(dir));
    return dir;
}

std::string cmd_eval(LabConfig cfg) {
    const std::string dir = resolve_out_dir(cfg, "eval");
    write_echo(cfg, dir);
    if (cfg.data.checkpoint.empty()) {
        throw std::invalid_argument("eval: data.checkpoint is required");
    }
    const Model model = load_checkpoint(cfg.data.checkpoint);
    const auto samples = read_jsonl(cfg.data.eval);
    EvalOptions opts;
    opts.system_len = cfg.training.system_len;
    opts.max_new = cfg.training.max_new;
    opts.batch = cfg.training.eval_batch;
    opts.max_samples = cfg.diagnostics.eval_samples;
    const CompressorSpec spec = CompressorSpec::parse(cfg.diagnostics.eval_spec);
    EvalRecord rec{0, spec.to_string(), true, evaluate(model, samples, spec, opts)};
    write_text_file(dir + "/eval.json", eval_record_json(rec) + "\n");
    return dir;
}

std::string cmd_sweep(LabConfig cfg) {
    const std::string dir = resolve_out_dir(cfg, "sweep");
    write_echo(cfg, dir);
    if (cfg.data.checkpoint.empty()) {
        throw std::invalid_argument("sweep: data.checkpoint is required");
    }
    const Model model = load_checkpoint(cfg.data.checkpoint);
    const auto samples = read_jsonl(cfg.data.eval);
    EvalOptions opts;
    opts.system_len = cfg.training.system_len;
    opts.max_new = cfg.training.max_new;
    opts.batch = cfg.training.eval_batch;
    opts.max_samples = cfg.diagnostics.sweep_samples;
    const auto points = compression_sweep(model, samples, parse_int_list(cfg.diagnostics.ks),
                                          parse_int_list(cfg.diagnostics.ss), opts);
    write_text_file(dir + "/sweep.csv", sweep_csv(points));
    return dir;
}

std::string cmd_probe(LabConfig cfg) {
    const std::string dir = resolve_out_dir(cfg, "probe");
    write_echo(cfg, dir);
    if (cfg.data.checkpoint.empty()) {
        throw std::invalid_argument("probe: data.checkpoint is required");
    }
    const Model model = load_checkpoint(cfg.data.checkpoint);
    const auto samples = read_jsonl(cfg.data.eval);
    const auto profile = attention_probe(model, samples, cfg.diagnostics.probe_samples,
                                         cfg.training.system_len);
    write_text_file(dir + "/attn_profile.csv", profile_csv(profile));
    return dir;
}

}  // namespace vclab
