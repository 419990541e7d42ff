#include <doctest.h>

#include <sstream>
#include <stdexcept>

#include "kpz/lp_scan.hpp"

using namespace kpz;

TEST_CASE("classification of refinement sequences") {
    CHECK(classify_lp({1.0, 1.2, 1.21}) == "stable");
    CHECK(classify_lp({1.0, 1.3, 1.7, 2.2}) == "diverging");
    CHECK(classify_lp({1.0, 1.3, 1.4, 1.6}) == "undetermined");
    CHECK(classify_lp({1.0, 1.1, 1.2}) == "undetermined");
}

TEST_CASE("kernel names round trip") {
    for (LpKernel k : {LpKernel::C, LpKernel::Y, LpKernel::dC, LpKernel::dY, LpKernel::W, LpKernel::Z})
        CHECK(lp_kernel_from_name(lp_kernel_name(k)) == k);
    CHECK_THROWS(lp_kernel_from_name("Q"));
}

TEST_CASE("Y scan: integrable power stabilizes, values grow with p") {
    LpScanOptions opt;
    opt.levels = 4;
    const Cutoff chi = Cutoff::smootherstep();
    const LpScanReport r = lp_norm_scan(LpKernel::Y, {1.0, 1.2}, chi, Cutoff::smootherstep_narrow(), opt);
    REQUIRE(r.entries.size() == 2);
    for (const auto& e : r.entries) {
        REQUIRE(e.values.size() == 4);
        CHECK(e.values[0] > 0.0);
        for (std::size_t i = 1; i < e.values.size(); ++i) CHECK(e.values[i] >= e.values[i - 1]);
    }
    CHECK(r.entries[0].classification == "stable");

    std::ostringstream os;
    write_lp_csv(r, os);
    CHECK(os.str().rfind("kernel,n,N,p,level,value,classification\n", 0) == 0);
}
