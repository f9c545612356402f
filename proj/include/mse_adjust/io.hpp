#ifndef MSE_ADJUST_IO_HPP_
#define MSE_ADJUST_IO_HPP_

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "mse_adjust/estimation.hpp"
#include "mse_adjust/gaussian_scm.hpp"

namespace mse_adjust {

/// Parses a file as JSON; std::invalid_argument if it is missing or malformed.
nlohmann::json read_json_file(const std::string& path);

/// {"nodes": [...], "edges": [{"from", "to", "coef"?}], "treatment", "outcome",
///  "noise_vars"?: {label: variance}}. Coefficients and noise variances are ignored.
CausalDag graph_from_json(const nlohmann::json& j);
/// Same layout; every edge needs "coef" and every node a noise variance.
LinearGaussianScm scm_from_json(const nlohmann::json& j);
nlohmann::json scm_to_json(const LinearGaussianScm& m);

/// CSV with a header row of node labels in any order; columns are
/// rearranged into the graph's node order.
Dataset read_dataset_csv(const std::string& path, const Dag& g);
Dataset parse_dataset_csv(std::istream& in, const Dag& g);
void write_dataset_csv(std::ostream& out, const Dataset& d);

/// Shortest round-trip decimal form.
std::string format_number(double v);

}  // namespace mse_adjust

#endif  // MSE_ADJUST_IO_HPP_
