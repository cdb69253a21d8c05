#pragma once
// Reference computations used to check the library: exhaustive path
// enumeration for the CRF and central differences for gradients. They share
// no code with the implementations under test beyond reading parameters.

#include <cstdint>
#include <functional>
#include <vector>

#include "mner/crf.h"
#include "mner/rng.h"
#include "mner/tensor.h"

namespace mner::testing {

struct CrfInstance {
  crf::Emissions em;
  crf::CrfParams params;
};

// n x K emissions and every finite transition drawn from U[lo, hi].
CrfInstance random_crf_instance(Rng& rng, std::size_t n, std::size_t k, double lo, double hi);

// Score of a path straight from the definition.
double enumerated_score(const CrfInstance& inst, const std::vector<int>& path);

struct Enumeration {
  double log_z = 0.0;
  double best_score = 0.0;
  std::vector<int> best_path;  // first maximal path in lexicographic order
  std::size_t paths = 0;
};

// Visits all K^n paths.
Enumeration enumerate_paths(const CrfInstance& inst);

// Central difference of f with respect to every entry of t; entries that are
// not finite are reported as NaN.
std::vector<double> central_differences(Tensor& t, const std::function<double()>& f,
                                        double eps);

}  // namespace mner::testing
