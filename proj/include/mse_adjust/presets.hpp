#ifndef MSE_ADJUST_PRESETS_HPP_
#define MSE_ADJUST_PRESETS_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "mse_adjust/gaussian_scm.hpp"

namespace mse_adjust {

/// Built-in models, all with unit noise variances:
///   m1             confounders W1, W2, O2 and an outcome parent O1
///   m2             M1's cousin with the collider C1
///   g3-demo        the nine-covariate pruning example (illustrative coefficients)
///   counterexample Y = A + O1 + O2, A = 2 O1 - 2 O2
std::vector<std::string> preset_names();
LinearGaussianScm preset_scm(std::string_view name);

}  // namespace mse_adjust

#endif  // MSE_ADJUST_PRESETS_HPP_
