#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kpz/batteries.hpp"

using namespace kpz;

TEST_CASE("battery names") {
    const auto names = battery_names();
    CHECK(names.size() == 4);
    CHECK(std::find(names.begin(), names.end(), "lemma-heatkernel") != names.end());
    CHECK_THROWS(run_battery("nope", Cutoff::smootherstep(), Cutoff::smootherstep_narrow(),
                             CouplingTensor::identity(), {}));
}

TEST_CASE("heat-kernel band stays bounded") {
    std::vector<Vec3> deltas;
    const Check c = heatkernel_band(Cutoff::smootherstep(), CouplingTensor::identity(), 1, 2.0, 4, &deltas);
    CHECK(c.pass);
    REQUIRE(deltas.size() == 4);
    for (const auto& d : deltas) CHECK(std::isfinite(d[0]));
    // zero coupling: m1 and the diagonal value both vanish
    std::vector<Vec3> z;
    heatkernel_band(Cutoff::smootherstep(), CouplingTensor::zero(), 1, 2.0, 2, &z);
    for (const auto& d : z) CHECK(d[0] == 0.0);
}

TEST_CASE("lemma-heatkernel battery passes and writes CSV") {
    BatteryOptions opt;
    opt.quick = true;
    const BatteryReport r = run_battery("lemma-heatkernel", Cutoff::smootherstep(),
                                        Cutoff::smootherstep_narrow(), CouplingTensor::identity(), opt);
    CHECK(r.pass());
    CHECK(!r.checks.empty());
    std::ostringstream os;
    r.write_csv(os);
    CHECK(os.str().rfind("battery,check,value,reference,tolerance,pass,detail\n", 0) == 0);
}
