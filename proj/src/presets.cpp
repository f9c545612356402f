#include "mse_adjust/presets.hpp"

#include <stdexcept>

namespace mse_adjust {

namespace {

LinearGaussianScm build(std::vector<std::string> nodes, const std::vector<WeightedEdge>& edges) {
  std::vector<double> noise(nodes.size(), 1.0);
  return LinearGaussianScm::from_edges(std::move(nodes), edges, "A", "Y", std::move(noise));
}

}  // namespace

std::vector<std::string> preset_names() { return {"m1", "m2", "g3-demo", "counterexample"}; }

LinearGaussianScm preset_scm(std::string_view name) {
  if (name == "m1") {
    return build({"A", "Y", "W1", "W2", "O1", "O2"}, {{"A", "Y", 3.0},
                                                      {"W2", "O1", 2.0},
                                                      {"W1", "O1", 2.0},
                                                      {"O1", "Y", 5.0},
                                                      {"W1", "A", -1.0},
                                                      {"W2", "A", 0.1},
                                                      {"O2", "A", 40.0},
                                                      {"O2", "Y", 0.5}});
  }
  if (name == "m2") {
    return build({"A", "Y", "W1", "C1", "O1", "O2"}, {{"A", "Y", 0.29},
                                                      {"O1", "C1", 6.0},
                                                      {"W1", "C1", 1.33},
                                                      {"O1", "Y", 0.71},
                                                      {"W1", "A", 0.55},
                                                      {"O2", "A", 1.1},
                                                      {"O2", "Y", 0.14}});
  }
  if (name == "g3-demo") {
    return build({"A", "Y", "S1", "O1", "O2", "S2", "S3", "P1", "O3", "O4", "I1"},
                 {{"A", "Y", 1.0},
                  {"S1", "O1", 1.0},
                  {"O1", "Y", 1.0},
                  {"S1", "A", 1.0},
                  {"O2", "Y", 1.0},
                  {"S2", "O2", 0.5},
                  {"S3", "O2", 0.5},
                  {"P1", "O3", 1.0},
                  {"O3", "Y", 0.5},
                  {"P1", "O4", 1.0},
                  {"O4", "Y", 0.5},
                  {"I1", "A", 1.0}});
  }
  if (name == "counterexample") {
    return build({"A", "Y", "O1", "O2"}, {{"A", "Y", 1.0},
                                          {"O1", "Y", 1.0},
                                          {"O2", "Y", 1.0},
                                          {"O1", "A", 2.0},
                                          {"O2", "A", -2.0}});
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) +
                              "' (expected m1, m2, g3-demo or counterexample)");
}

}  // namespace mse_adjust
