// Full verification sweep: one check per criterion, printed pass/fail line
// by line, mirroring `ektau verify-all`.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>

#include "ektau/verify.hpp"

using namespace ektau;

TEST_CASE("verification suite", "[acceptance]") {
    const auto results = run_verification();
    REQUIRE(results.size() == 8);
    for (const auto& r : results) {
        std::printf("%s  [%d] %-34s (%.2f s)  %s\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.seconds, r.details.c_str());
        std::fflush(stdout);
        INFO("[" << r.id << "] " << r.name << ": " << r.details);
        CHECK(r.pass);
    }
}
