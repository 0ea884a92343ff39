#include "wildfire/bayes.hpp"

#include <cmath>
#include <string>

namespace wildfire::bayes {
namespace {

void check_unit(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw DataError(std::string("bayes: ") + name + " = " +
                        std::to_string(v) + " is not a probability in [0, 1]");
}

}  // namespace

BayesResult fire_probability(const BayesInputs& in) {
    check_unit(in.p_cause_given_fire, "P(cause|fire)");
    check_unit(in.p_fire_given_other, "P(fire|other)");
    check_unit(in.p_other, "P(other)");
    check_unit(in.p_cause_and_other, "P(cause, other)");
    if (in.p_cause_and_other == 0.0)
        throw DataError("bayes: P(cause, other) is zero, the estimate is undefined");

    BayesResult r;
    r.probability = in.p_cause_given_fire * in.p_fire_given_other * in.p_other /
                    in.p_cause_and_other;
    r.inconsistent = r.probability > 1.0;
    return r;
}

}  // namespace wildfire::bayes
