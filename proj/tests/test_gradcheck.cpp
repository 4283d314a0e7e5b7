#include <cstdint>

#include "doctest.h"
#include "gradcheck_util.hpp"

TEST_CASE("analytic gradients match central finite differences") {
    for (const auto& regime : testutil::kGradRegimes) {
        CAPTURE(regime.name);
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            CAPTURE(seed);
            CHECK(testutil::gradcheck_max_rel_error(seed, regime) < 1e-4);
        }
    }
}
