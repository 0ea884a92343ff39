#pragma once

#include "wildfire/error.hpp"

namespace wildfire::bayes {

// Conditional-probability inputs for the fire-likelihood identity
//
//   P(fire | cause, other) =
//       P(cause | fire) * P(fire | other) * P(other) / P(cause, other)
//
// where "other" stands for the non-cause context variables (vegetation,
// weather band, region, ...) the estimate is conditioned on.
struct BayesInputs {
    double p_cause_given_fire = 0.0;  // P(cause | fire)
    double p_fire_given_other = 0.0;  // P(fire | other)
    double p_other = 0.0;             // P(other)
    double p_cause_and_other = 0.0;   // P(cause, other), the denominator
};

struct BayesResult {
    double probability = 0.0;
    // Set when the inputs are mutually impossible (quotient above 1); the
    // raw quotient is still reported so the caller can see how far off the
    // inputs are.
    bool inconsistent = false;
};

// Evaluates the identity above.  Inputs outside [0, 1] raise DataError, as
// does a zero denominator.
BayesResult fire_probability(const BayesInputs& in);

}  // namespace wildfire::bayes
