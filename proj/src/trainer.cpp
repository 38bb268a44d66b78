#include "vclab/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "vclab/accounting.hpp"
#include "vclab/ops.hpp"
#include "vclab/optimizer.hpp"
#include "vclab/rng.hpp"
#include "vclab/textio.hpp"

#include "json.hpp"

namespace vclab {

void RunConfig::validate() const {
    model.validate();
    plan.validate();
    if (total_steps < static_cast<long long>(plan.stages.size())) {
        throw std::invalid_argument("run: total_steps below stage count");
    }
    if (batch_size < 1) throw std::invalid_argument("run: batch_size must be >= 1");
    if (lr_peak <= 0.0) throw std::invalid_argument("run: lr must be positive");
    if (warmup_frac < 0.0 || warmup_frac >= 1.0) {
        throw std::invalid_argument("run: warmup fraction must lie in [0, 1)");
    }
    if (max_new < 1) throw std::invalid_argument("run: max_new must be >= 1");
    if (system_len < 1) throw std::invalid_argument("run: system_len must be >= 1");
    for (const auto& st : plan.stages) {
        if (!st.spec.is_identity() &&
            (st.spec.layer < 1 || st.spec.layer > model.n_layers)) {
            throw std::invalid_argument("run: stage layer outside [1, n_layers]");
        }
    }
}

namespace {

// Next-token loss: logits at t score the token at t+1; only answer-role
// targets carry weight.
Tensor batch_loss(const ForwardResult& fr) {
    const int B = fr.batch, T = fr.seq_len;
    std::vector<int> targets(static_cast<size_t>(B) * T, 0);
    std::vector<double> mask(static_cast<size_t>(B) * T, 0.0);
    for (int b = 0; b < B; ++b) {
        for (int t = 0; t + 1 < T; ++t) {
            const size_t next = static_cast<size_t>(b) * T + t + 1;
            if (fr.loss_mask[next] != 0.0) {
                targets[static_cast<size_t>(b) * T + t] = fr.tokens[next];
                mask[static_cast<size_t>(b) * T + t] = fr.loss_mask[next];
            }
        }
    }
    return ops::cross_entropy_masked(fr.logits, targets, mask);
}

std::string join_ids(const std::vector<size_t>& ids) {
    std::ostringstream os;
    for (size_t i = 0; i < ids.size(); ++i) os << (i ? "," : "") << ids[i];
    return os.str();
}

}  // namespace

std::string metrics_csv(const RunMetrics& metrics) {
    std::ostringstream os;
    os << "step,stage,loss,flops_cum\n";
    for (const auto& s : metrics.steps) {
        os << s.step << ',' << s.stage << ',' << fmt_double(s.loss) << ','
           << fmt_double(s.flops_cum) << '\n';
    }
    return os.str();
}

std::string eval_record_json(const EvalRecord& record) {
    nlohmann::json j;
    j["step"] = record.step;
    j["spec"] = record.spec;
    j["final"] = record.final_eval;
    j["overall"] = record.result.overall;
    j["n"] = record.result.n;
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [kind, acc] : record.result.per_kind) {
        per[kind] = {{"accuracy", acc}, {"n", record.result.per_kind_n.at(kind)}};
    }
    j["per_kind"] = per;
    return j.dump();
}

EvalResult evaluate(const Model& model, const std::vector<QASample>& samples,
                    const CompressorSpec& spec, const EvalOptions& options) {
    if (samples.empty()) throw std::invalid_argument("evaluate: empty dataset");
    const size_t limit = options.max_samples > 0
                             ? std::min(samples.size(), static_cast<size_t>(options.max_samples))
                             : samples.size();

    // Bucket by prompt length so each generation batch is rectangular.
    std::map<int, std::vector<size_t>> buckets;
    std::vector<RoleTaggedSequence> prompts(limit);
    for (size_t i = 0; i < limit; ++i) {
        prompts[i] = render_prompt(samples[i], options.system_len, model.config.max_seq);
        buckets[prompts[i].length()].push_back(i);
    }

    std::vector<bool> correct(limit, false);
    for (const auto& [len, ids] : buckets) {
        for (size_t off = 0; off < ids.size(); off += static_cast<size_t>(options.batch)) {
            const size_t end = std::min(ids.size(), off + static_cast<size_t>(options.batch));
            std::vector<const RoleTaggedSequence*> batch;
            batch.reserve(end - off);
            for (size_t k = off; k < end; ++k) batch.push_back(&prompts[ids[k]]);
            const auto generated = generate_answer(model, batch, spec, options.max_new, kEosId);
            for (size_t k = off; k < end; ++k) {
                correct[ids[k]] = generated[k - off] == samples[ids[k]].answer_tokens;
            }
        }
    }

    EvalResult res;
    res.n = static_cast<long long>(limit);
    long long hits = 0;
    for (size_t i = 0; i < limit; ++i) {
        const std::string kind = kind_label(samples[i].kind);
        res.per_kind_n[kind] += 1;
        res.per_kind[kind] += correct[i] ? 1.0 : 0.0;
        hits += correct[i] ? 1 : 0;
    }
    for (auto& [kind, sum] : res.per_kind) sum /= static_cast<double>(res.per_kind_n[kind]);
    res.overall = static_cast<double>(hits) / static_cast<double>(limit);
    return res;
}

TrainResult train(const RunConfig& run) {
    run.validate();
    const auto t_start = std::chrono::steady_clock::now();

    const auto train_set = read_jsonl(run.train_path);
    const auto eval_set = read_jsonl(run.eval_path);
    if (train_set.empty()) throw std::invalid_argument("train: empty training set");
    if (eval_set.empty()) throw std::invalid_argument("train: empty eval set");

    std::vector<RoleTaggedSequence> rendered;
    rendered.reserve(train_set.size());
    for (const auto& s : train_set) {
        rendered.push_back(render_sequence(s, run.system_len, run.model.max_seq));
    }

    Model model = build_model(run.model, run.model_seed);
    AdamOptimizer opt(model.parameters());

    const auto stage_counts = split_steps(run.total_steps, run.plan);
    std::vector<long long> stage_end(stage_counts.size());
    std::partial_sum(stage_counts.begin(), stage_counts.end(), stage_end.begin());
    auto stage_of = [&](long long step) {
        for (size_t i = 0; i < stage_end.size(); ++i) {
            if (step < stage_end[i]) return static_cast<int>(i);
        }
        throw std::logic_error("train: step outside all stages");
    };

    const bool writing = !run.out_dir.empty();
    if (writing) std::filesystem::create_directories(run.out_dir);

    RunMetrics metrics;
    metrics.steps.reserve(static_cast<size_t>(run.total_steps));
    double flops_cum = 0.0;

    EvalOptions eval_opts;
    eval_opts.system_len = run.system_len;
    eval_opts.max_new = run.max_new;
    eval_opts.batch = run.eval_batch;

    std::vector<size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    size_t cursor = 0;
    uint64_t epoch = 0;
    {
        Rng shuffle_rng(run.data_seed, epoch);
        shuffle_rng.shuffle(order);
    }

    for (long long step = 0; step < run.total_steps; ++step) {
        const int stage = stage_of(step);
        const CompressorSpec& spec = run.plan.stages[static_cast<size_t>(stage)].spec;

        std::vector<const RoleTaggedSequence*> batch;
        std::vector<size_t> batch_ids;
        batch.reserve(static_cast<size_t>(run.batch_size));
        for (int i = 0; i < run.batch_size; ++i) {
            if (cursor >= order.size()) {
                cursor = 0;
                ++epoch;
                Rng shuffle_rng(run.data_seed, epoch);
                shuffle_rng.shuffle(order);
            }
            batch_ids.push_back(order[cursor]);
            batch.push_back(&rendered[order[cursor]]);
            ++cursor;
        }

        ForwardResult fr = forward(model, batch, spec, /*capture=*/false,
                                   /*call_seed=*/static_cast<uint64_t>(step));
        Tensor loss = batch_loss(fr);
        const double loss_v = loss.item();
        if (!std::isfinite(loss_v)) {
            throw std::runtime_error("training aborted: non-finite loss at step " +
                                     std::to_string(step) + " (stage " + std::to_string(stage + 1) +
                                     ", spec " + spec.to_string() + "); batch sample ids: " +
                                     join_ids(batch_ids));
        }
        opt.zero_grad();
        backward(loss);
        opt.step(cosine_lr(run.lr_peak, run.warmup_frac, step, run.total_steps));

        flops_cum += static_cast<double>(run.batch_size) *
                     flops_train_step(run.model.d_model, run.model.vocab_size, fr.layer_lengths);
        metrics.steps.push_back({step, stage + 1, spec.to_string(), loss_v, flops_cum});

        const bool stage_boundary = step + 1 < run.total_steps && stage_of(step + 1) != stage;
        if (writing && stage_boundary) {
            save_checkpoint(model,
                            run.out_dir + "/ckpt_stage" + std::to_string(stage + 1) + ".bin");
        }

        const bool periodic_eval = run.eval_every > 0 && (step + 1) % run.eval_every == 0 &&
                                   step + 1 < run.total_steps;
        if (periodic_eval) {
            eval_opts.max_samples = run.eval_max_samples;
            EvalRecord rec{step, spec.to_string(), false,
                           evaluate(model, eval_set, spec, eval_opts)};
            metrics.evals.push_back(std::move(rec));
        }
    }

    // Deployment-style final eval: compression off.
    eval_opts.max_samples = run.final_eval_max_samples;
    EvalRecord final_rec{run.total_steps - 1, CompressorSpec{}.to_string(), true,
                         evaluate(model, eval_set, CompressorSpec{}, eval_opts)};
    metrics.evals.push_back(std::move(final_rec));

    metrics.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    if (writing) {
        save_checkpoint(model, run.out_dir + "/ckpt_final.bin");
        write_text_file(run.out_dir + "/metrics.csv", metrics_csv(metrics));
        std::ostringstream evals;
        for (const auto& rec : metrics.evals) evals << eval_record_json(rec) << "\n";
        write_text_file(run.out_dir + "/evals.jsonl", evals.str());
        // Wall clock lives outside the deterministic metric files.
        write_text_file(run.out_dir + "/walltime.txt", fmt_double(metrics.wall_seconds) + "\n");
    }

    return TrainResult{std::move(model), std::move(metrics)};
}

}  // namespace vclab
