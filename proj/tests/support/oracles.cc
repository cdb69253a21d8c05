#include "oracles.h"

#include <cmath>
#include <limits>

namespace mner::testing {

CrfInstance random_crf_instance(Rng& rng, std::size_t n, std::size_t k, double lo, double hi) {
  CrfInstance inst{crf::Emissions(n, k), crf::CrfParams(k)};
  for (double& v : inst.em.data) v = rng.uniform(lo, hi);
  for (std::size_t i = 0; i < k + 2; ++i) {
    for (std::size_t j = 0; j < k + 2; ++j) {
      if (inst.params.is_fixed(i, j)) continue;
      inst.params.at(i, j) = rng.uniform(lo, hi);
    }
  }
  return inst;
}

double enumerated_score(const CrfInstance& inst, const std::vector<int>& path) {
  const auto& a = inst.params;
  const auto k = a.num_tags();
  double s = a(k, static_cast<std::size_t>(path.front()));
  for (std::size_t i = 0; i < path.size(); ++i) {
    s += inst.em(i, static_cast<std::size_t>(path[i]));
    if (i + 1 < path.size()) s += a(static_cast<std::size_t>(path[i]), static_cast<std::size_t>(path[i + 1]));
  }
  return s + a(static_cast<std::size_t>(path.back()), k + 1);
}

Enumeration enumerate_paths(const CrfInstance& inst) {
  const std::size_t n = inst.em.rows;
  const int k = static_cast<int>(inst.em.cols);
  std::vector<int> path(n, 0);
  std::vector<double> scores;
  Enumeration out;
  out.best_score = -std::numeric_limits<double>::infinity();
  while (true) {
    const double s = enumerated_score(inst, path);
    scores.push_back(s);
    if (s > out.best_score) {
      out.best_score = s;
      out.best_path = path;
    }
    bool done = true;
    for (std::size_t pos = n; pos-- > 0;) {
      if (++path[pos] < k) {
        done = false;
        break;
      }
      path[pos] = 0;
    }
    if (done) break;
  }
  double m = -std::numeric_limits<double>::infinity();
  for (double s : scores) m = std::max(m, s);
  long double acc = 0.0L;
  for (double s : scores) acc += std::exp(static_cast<long double>(s - m));
  out.log_z = m + static_cast<double>(std::log(acc));
  out.paths = scores.size();
  return out;
}

std::vector<double> central_differences(Tensor& t, const std::function<double()>& f,
                                        double eps) {
  std::vector<double> out(t.size());
  auto v = t.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      out[i] = std::nan("");
      continue;
    }
    const double keep = v[i];
    v[i] = keep + eps;
    const double up = f();
    v[i] = keep - eps;
    const double down = f();
    v[i] = keep;
    out[i] = (up - down) / (2.0 * eps);
  }
  return out;
}

}  // namespace mner::testing
