#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vclab/model.hpp"

namespace vclab {

// Text vocabulary layout. Visual positions use patch-table attribute ids
// instead, so these never exceed vocab_size = 64 for any n_attrs <= 44.
constexpr int kPadId = 0;
constexpr int kEosId = 1;  // answer terminator
constexpr int kSepId = 2;  // last instruction token in every layout
constexpr int kSysBase = 3;    // four system filler tokens, cycled
constexpr int kSysTokens = 4;
constexpr int kKwLookup = 7;
constexpr int kKwMajority = 8;
constexpr int kKwCount = 9;
constexpr int kDigitBase = 10;  // ten digit tokens
constexpr int kAttrBase = 20;   // attribute answer tokens

enum class QuestionKind { lookup, majority, count };

const char* kind_label(QuestionKind kind);
QuestionKind kind_from_label(const std::string& label);

// Square grid of per-cell attribute ids. Cells are drawn left-to-right,
// top-to-bottom; with probability `redundancy` a cell copies its left
// neighbor (first column copies the cell above), otherwise it is sampled
// uniformly. Cell (0,0) is always sampled fresh.
struct GridImage {
    int side = 0;
    std::vector<int> cells;  // row-major, side*side attribute ids
    double redundancy = 0.0;

    int at(int row, int col) const { return cells[static_cast<size_t>(row) * side + col]; }
};

struct QASample {
    GridImage image;
    QuestionKind kind = QuestionKind::lookup;
    int arg_row = -1;   // lookup
    int arg_col = -1;   // lookup
    int arg_attr = -1;  // count
    std::vector<int> question_tokens;  // text ids, without the trailing separator
    std::vector<int> answer_tokens;    // text ids, without the terminator
    bool image_first = true;           // image/question order coin flip
    std::string split;                 // "train" or "eval"
};

// Grid semantics used by the generator. Majority ties break toward the
// smaller attribute id; generated majority samples never carry ties
// because tie grids are redrawn.
int grid_lookup(const GridImage& g, int row, int col);
int grid_majority(const GridImage& g);
bool grid_majority_tied(const GridImage& g);
int grid_count(const GridImage& g, int attr);

struct DatasetParams {
    int n_samples = 0;
    int grid_side = 8;
    int n_attrs = 8;
    double redundancy = 0.5;
    std::vector<QuestionKind> kinds = {QuestionKind::lookup};
    std::string split = "train";
};

// Pure function of (seed, params); sample i draws from substream i so
// generation could shard without changing output.
std::vector<QASample> gen_dataset(uint64_t seed, const DatasetParams& params);

// [SYSTEM][VISUAL][Q..][SEP][ANSWER..EOS] when image_first, otherwise
// [SYSTEM][Q..][VISUAL][SEP][ANSWER..EOS]; loss mask on answer positions
// only. max_len > 0 enforces a length budget.
RoleTaggedSequence render_sequence(const QASample& sample, int system_len, int max_len = 0);

// Same layout truncated before the first answer position.
RoleTaggedSequence render_prompt(const QASample& sample, int system_len, int max_len = 0);

// Line-delimited JSON records.
void write_jsonl(const std::string& path, const std::vector<QASample>& samples);
std::vector<QASample> read_jsonl(const std::string& path);

}  // namespace vclab
