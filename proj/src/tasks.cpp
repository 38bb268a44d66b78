#include "vclab/tasks.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "vclab/rng.hpp"

#include "json.hpp"

namespace vclab {

const char* kind_label(QuestionKind kind) {
    switch (kind) {
        case QuestionKind::lookup: return "lookup";
        case QuestionKind::majority: return "majority";
        case QuestionKind::count: return "count";
    }
    throw std::logic_error("kind_label: bad enum value");
}

QuestionKind kind_from_label(const std::string& label) {
    for (QuestionKind k : {QuestionKind::lookup, QuestionKind::majority, QuestionKind::count}) {
        if (label == kind_label(k)) return k;
    }
    throw std::invalid_argument("unknown question kind '" + label + "'");
}

int grid_lookup(const GridImage& g, int row, int col) {
    if (row < 0 || row >= g.side || col < 0 || col >= g.side) {
        throw std::out_of_range("grid_lookup: cell outside grid");
    }
    return g.at(row, col);
}

namespace {

std::vector<int> attr_histogram(const GridImage& g) {
    int max_attr = 0;
    for (int c : g.cells) max_attr = std::max(max_attr, c);
    std::vector<int> hist(static_cast<size_t>(max_attr) + 1, 0);
    for (int c : g.cells) ++hist[static_cast<size_t>(c)];
    return hist;
}

}  // namespace

int grid_majority(const GridImage& g) {
    const auto hist = attr_histogram(g);
    int best = 0;
    for (size_t a = 1; a < hist.size(); ++a) {
        if (hist[a] > hist[static_cast<size_t>(best)]) best = static_cast<int>(a);
    }
    return best;  // ties resolve to the smaller id by scan order
}

bool grid_majority_tied(const GridImage& g) {
    const auto hist = attr_histogram(g);
    const int top = *std::max_element(hist.begin(), hist.end());
    return std::count(hist.begin(), hist.end(), top) > 1;
}

int grid_count(const GridImage& g, int attr) {
    int n = 0;
    for (int c : g.cells) n += c == attr ? 1 : 0;
    return n;
}

namespace {

GridImage draw_grid(Rng& rng, int side, int n_attrs, double redundancy) {
    GridImage g;
    g.side = side;
    g.redundancy = redundancy;
    g.cells.resize(static_cast<size_t>(side) * side);
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            int value;
            if (r == 0 && c == 0) {
                value = static_cast<int>(rng.uniform_below(static_cast<uint64_t>(n_attrs)));
            } else {
                const int neighbor = c == 0 ? g.at(r - 1, c) : g.at(r, c - 1);
                if (rng.uniform() < redundancy) {
                    value = neighbor;
                } else {
                    value = static_cast<int>(rng.uniform_below(static_cast<uint64_t>(n_attrs)));
                }
            }
            g.cells[static_cast<size_t>(r) * side + c] = value;
        }
    }
    return g;
}

std::vector<int> digits_tokens(int value) {
    if (value < 0) throw std::logic_error("digits_tokens: negative value");
    if (value == 0) return {kDigitBase};
    std::vector<int> out;
    while (value > 0) {
        out.push_back(kDigitBase + value % 10);
        value /= 10;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

}  // namespace

std::vector<QASample> gen_dataset(uint64_t seed, const DatasetParams& params) {
    if (params.n_samples < 0) throw std::invalid_argument("gen_dataset: negative sample count");
    if (params.grid_side < 1) throw std::invalid_argument("gen_dataset: grid side must be >= 1");
    if (params.n_attrs < 1 || params.n_attrs > 44) {
        throw std::invalid_argument("gen_dataset: n_attrs must lie in [1, 44]");
    }
    if (params.redundancy < 0.0 || params.redundancy > 1.0) {
        throw std::invalid_argument("gen_dataset: redundancy must lie in [0, 1]");
    }
    if (params.kinds.empty()) throw std::invalid_argument("gen_dataset: no question kinds");
    if (params.grid_side > 9) {
        throw std::invalid_argument("gen_dataset: grid side above 9 breaks digit questions");
    }

    std::vector<QASample> out;
    out.reserve(static_cast<size_t>(params.n_samples));
    for (int i = 0; i < params.n_samples; ++i) {
        Rng rng(seed, static_cast<uint64_t>(i) + 1);
        QASample s;
        s.split = params.split;
        s.kind = params.kinds[rng.uniform_below(params.kinds.size())];
        s.image_first = rng.uniform() < 0.5;
        s.image = draw_grid(rng, params.grid_side, params.n_attrs, params.redundancy);
        if (s.kind == QuestionKind::majority) {
            // Redraw tie grids so the answer is unique.
            int guard = 0;
            while (grid_majority_tied(s.image)) {
                if (++guard > 10000) {
                    throw std::runtime_error("gen_dataset: could not draw a tie-free grid");
                }
                s.image = draw_grid(rng, params.grid_side, params.n_attrs, params.redundancy);
            }
        }
        switch (s.kind) {
            case QuestionKind::lookup:
                s.arg_row = static_cast<int>(rng.uniform_below(static_cast<uint64_t>(params.grid_side)));
                s.arg_col = static_cast<int>(rng.uniform_below(static_cast<uint64_t>(params.grid_side)));
                s.question_tokens = {kKwLookup, kDigitBase + s.arg_row, kDigitBase + s.arg_col};
                s.answer_tokens = {kAttrBase + grid_lookup(s.image, s.arg_row, s.arg_col)};
                break;
            case QuestionKind::majority:
                s.question_tokens = {kKwMajority};
                s.answer_tokens = {kAttrBase + grid_majority(s.image)};
                break;
            case QuestionKind::count:
                s.arg_attr = static_cast<int>(rng.uniform_below(static_cast<uint64_t>(params.n_attrs)));
                s.question_tokens = {kKwCount, kAttrBase + s.arg_attr};
                s.answer_tokens = digits_tokens(grid_count(s.image, s.arg_attr));
                break;
        }
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

RoleTaggedSequence render(const QASample& sample, int system_len, int max_len, bool with_answer) {
    RoleTaggedSequence seq;
    auto push = [&seq](int id, Role role, double mask) {
        seq.token_ids.push_back(id);
        seq.roles.push_back(role);
        seq.loss_mask.push_back(mask);
    };
    for (int i = 0; i < system_len; ++i) {
        push(kSysBase + i % kSysTokens, Role::system, 0.0);
    }
    auto push_visual = [&] {
        seq.visual_start = seq.length();
        for (int cell : sample.image.cells) push(cell, Role::visual, 0.0);
        seq.visual_end = seq.length();
    };
    auto push_question = [&] {
        for (int id : sample.question_tokens) push(id, Role::instruction, 0.0);
    };
    if (sample.image_first) {
        push_visual();
        push_question();
    } else {
        push_question();
        push_visual();
    }
    push(kSepId, Role::instruction, 0.0);
    if (with_answer) {
        for (int id : sample.answer_tokens) push(id, Role::answer, 1.0);
        push(kEosId, Role::answer, 1.0);
    }
    if (max_len > 0 && seq.length() > max_len) {
        throw std::invalid_argument("render_sequence: length " + std::to_string(seq.length()) +
                                    " exceeds budget " + std::to_string(max_len));
    }
    seq.validate();
    return seq;
}

}  // namespace

RoleTaggedSequence render_sequence(const QASample& sample, int system_len, int max_len) {
    return render(sample, system_len, max_len, /*with_answer=*/true);
}

RoleTaggedSequence render_prompt(const QASample& sample, int system_len, int max_len) {
    return render(sample, system_len, max_len, /*with_answer=*/false);
}

void write_jsonl(const std::string& path, const std::vector<QASample>& samples) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open dataset for writing: " + path);
    for (const auto& s : samples) {
        nlohmann::json j;
        j["split"] = s.split;
        j["kind"] = kind_label(s.kind);
        j["grid"] = {{"side", s.image.side}, {"cells", s.image.cells}, {"p", s.image.redundancy}};
        j["image_first"] = s.image_first;
        nlohmann::json args = nlohmann::json::object();
        if (s.kind == QuestionKind::lookup) {
            args["row"] = s.arg_row;
            args["col"] = s.arg_col;
        } else if (s.kind == QuestionKind::count) {
            args["attr"] = s.arg_attr;
        }
        j["args"] = args;
        j["question"] = s.question_tokens;
        j["answer"] = s.answer_tokens;
        os << j.dump() << "\n";
    }
    if (!os) throw std::runtime_error("dataset write failed: " + path);
}

std::vector<QASample> read_jsonl(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open dataset: " + path);
    std::vector<QASample> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        QASample s;
        s.split = j.at("split").get<std::string>();
        s.kind = kind_from_label(j.at("kind").get<std::string>());
        s.image.side = j.at("grid").at("side").get<int>();
        s.image.cells = j.at("grid").at("cells").get<std::vector<int>>();
        s.image.redundancy = j.at("grid").at("p").get<double>();
        if (static_cast<int>(s.image.cells.size()) != s.image.side * s.image.side) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad grid size");
        }
        s.image_first = j.at("image_first").get<bool>();
        const auto& args = j.at("args");
        if (s.kind == QuestionKind::lookup) {
            s.arg_row = args.at("row").get<int>();
            s.arg_col = args.at("col").get<int>();
        } else if (s.kind == QuestionKind::count) {
            s.arg_attr = args.at("attr").get<int>();
        }
        s.question_tokens = j.at("question").get<std::vector<int>>();
        s.answer_tokens = j.at("answer").get<std::vector<int>>();
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace vclab
