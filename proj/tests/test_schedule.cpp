#include <fstream>
#include <sstream>

#include "doctest.h"
#include "vclab/accounting.hpp"
#include "vclab/schedule.hpp"

using namespace vclab;

namespace {

bool is_pool(const CompressorSpec& s, int layer, int stride) {
    return s.kind == CompressorKind::avg_pool && s.layer == layer && s.stride == stride;
}

// Rendering compared against the checked-in golden file.
std::string render_schemes_paper_scale() {
    std::ostringstream os;
    for (const auto& name : kSchemeNames) {
        const auto plan = named_scheme(name, SchemeScale::paper, 32);
        os << "scheme=" << name << " stages=" << plan.stages.size() << "\n";
        for (size_t i = 0; i < plan.stages.size(); ++i) {
            const auto& st = plan.stages[i];
            os << "  stage=" << (i + 1);
            if (st.spec.is_identity()) {
                os << " layer=/ stride=/ cr=100%";
            } else {
                os << " layer=" << st.spec.layer << " stride=" << st.spec.stride << " cr="
                   << compression_ratio(32, 576, st.spec.layer, st.spec.stride).percent() << "%";
            }
            char frac[16];
            std::snprintf(frac, sizeof frac, "%.2f", st.fraction);
            os << " epoch=" << frac << "\n";
        }
    }
    return os.str();
}

}  // namespace

TEST_CASE("named schemes carry the table's layer/stride/fraction tuples") {
    const auto two = named_scheme("two", SchemeScale::paper, 32);
    REQUIRE(two.stages.size() == 2);
    CHECK(is_pool(two.stages[0].spec, 2, 8));
    CHECK(two.stages[0].fraction == doctest::Approx(0.5));
    CHECK(two.stages[1].spec.is_identity());

    const auto single = named_scheme("single", SchemeScale::paper, 32);
    REQUIRE(single.stages.size() == 1);
    CHECK(single.stages[0].spec.is_identity());
    CHECK(single.stages[0].fraction == doctest::Approx(1.0));

    const auto three_d = named_scheme("three-deeper", SchemeScale::paper, 32);
    REQUIRE(three_d.stages.size() == 3);
    CHECK(is_pool(three_d.stages[0].spec, 2, 8));
    CHECK(is_pool(three_d.stages[1].spec, 16, 8));
    CHECK(three_d.stages[2].spec.is_identity());

    const auto four_dw = named_scheme("four-deeper-then-wider", SchemeScale::paper, 32);
    REQUIRE(four_dw.stages.size() == 4);
    CHECK(is_pool(four_dw.stages[0].spec, 2, 8));
    CHECK(is_pool(four_dw.stages[1].spec, 16, 8));
    CHECK(is_pool(four_dw.stages[2].spec, 16, 2));
    CHECK(four_dw.stages[3].spec.is_identity());

    const auto four_wd = named_scheme("four-wider-then-deeper", SchemeScale::paper, 32);
    CHECK(is_pool(four_wd.stages[0].spec, 2, 8));
    CHECK(is_pool(four_wd.stages[1].spec, 2, 2));
    CHECK(is_pool(four_wd.stages[2].spec, 16, 2));
    CHECK(four_wd.stages[3].spec.is_identity());

    CHECK_THROWS(named_scheme("five", SchemeScale::paper, 32));
}

TEST_CASE("desk scale maps the deep layer to N/2 and keeps strides") {
    const auto plan = named_scheme("three-deeper", SchemeScale::desk, 8);
    CHECK(is_pool(plan.stages[0].spec, 2, 8));
    CHECK(is_pool(plan.stages[1].spec, 4, 8));
    CHECK(plan.stages[2].spec.is_identity());
    CHECK_THROWS(named_scheme("two", SchemeScale::paper, 8));  // paper scale needs 32 layers
}

TEST_CASE("per-stage CR sequence is strictly decreasing and ends at 100%") {
    for (const auto& name : kSchemeNames) {
        const auto plan = named_scheme(name, SchemeScale::paper, 32);
        double prev = 1e18;
        for (const auto& st : plan.stages) {
            const double cr = st.spec.is_identity()
                                  ? 1.0
                                  : compression_ratio(32, 576, st.spec.layer, st.spec.stride).value();
            CHECK(cr < prev);
            prev = cr;
        }
        CHECK(plan.stages.back().spec.is_identity());
    }
}

TEST_CASE("schemes golden file") {
    std::ifstream in(std::string(VCLAB_TEST_DIR) + "/golden/schemes.txt");
    REQUIRE(in.good());
    std::stringstream want;
    want << in.rdbuf();
    CHECK(render_schemes_paper_scale() == want.str());
}

TEST_CASE("split_steps: exact division, table split, floor remainder") {
    const auto thirds = named_scheme("three-deeper", SchemeScale::paper, 32);
    CHECK(split_steps(300, thirds) == std::vector<long long>{100, 100, 100});

    StagePlan tbl;
    tbl.name = "75/25";
    tbl.stages = {{0.75, CompressorSpec{}}, {0.25, CompressorSpec{}}};
    CHECK(split_steps(100, tbl) == std::vector<long long>{75, 25});

    StagePlan uneven;
    uneven.name = "uneven";
    uneven.stages = {{0.33, CompressorSpec{}}, {0.33, CompressorSpec{}}, {0.34, CompressorSpec{}}};
    CHECK(split_steps(10, uneven) == std::vector<long long>{3, 3, 4});

    // Zero-fraction stages may take zero steps; positive ones may not.
    StagePlan all_first;
    all_first.name = "100/0";
    all_first.stages = {{1.0, CompressorSpec{}}, {0.0, CompressorSpec{}}};
    CHECK(split_steps(40, all_first) == std::vector<long long>{40, 0});

    StagePlan tiny_tail;
    tiny_tail.name = "tiny-tail";
    tiny_tail.stages = {{0.999, CompressorSpec{}}, {0.001, CompressorSpec{}}};
    const auto counts = split_steps(10, tiny_tail);
    CHECK(counts == std::vector<long long>{9, 1});

    CHECK_THROWS(split_steps(1, tbl));  // fewer steps than nonzero stages
}

TEST_CASE("split counts always sum to the total") {
    for (const auto& name : kSchemeNames) {
        const auto plan = named_scheme(name, SchemeScale::paper, 32);
        for (long long total : {5LL, 7LL, 99LL, 400LL, 1001LL}) {
            long long sum = 0;
            for (auto c : split_steps(total, plan)) sum += c;
            CHECK(sum == total);
        }
    }
}

TEST_CASE("spec_at_step: boundaries, first and last stages, change count") {
    const auto two = named_scheme("two", SchemeScale::paper, 32);
    CHECK(is_pool(spec_at_step(two, 49, 100), 2, 8));
    CHECK(spec_at_step(two, 50, 100).is_identity());
    CHECK_THROWS(spec_at_step(two, 100, 100));
    CHECK_THROWS(spec_at_step(two, -1, 100));

    for (const auto& name : kSchemeNames) {
        const auto plan = named_scheme(name, SchemeScale::paper, 32);
        const long long total = 97;
        if (plan.stages.size() > 1) {
            CHECK(!spec_at_step(plan, 0, total).is_identity());  // heavy stage first
        }
        CHECK(spec_at_step(plan, total - 1, total).is_identity());
        int changes = 0;
        for (long long s = 1; s < total; ++s) {
            if (!(spec_at_step(plan, s, total) == spec_at_step(plan, s - 1, total))) ++changes;
        }
        CHECK(changes == static_cast<int>(plan.stages.size()) - 1);
    }
}
