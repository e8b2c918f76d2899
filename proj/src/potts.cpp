#include <cmath>
#include <random>
#include <stdexcept>

#include "loopybp/factor_graph.hpp"

namespace loopybp {

FactorGraph gen_potts_grid(std::int32_t n, double c, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_potts_grid: n must be >= 1");
  if (!(c >= 0.0)) throw std::invalid_argument("gen_potts_grid: c must be >= 0");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coupling(-c, c);

  const std::int32_t nv = n * n;
  std::vector<VariableSpec> vars(nv);
  for (std::int32_t i = 0; i < nv; ++i) vars[i] = {i, 2};

  std::vector<Factor> factors;
  factors.reserve(nv + 2 * n * (n - 1));
  auto vid = [n](std::int32_t r, std::int32_t col) { return r * n + col; };

  // Unaries in row-major variable order.
  for (std::int32_t i = 0; i < nv; ++i) {
    const double u = coupling(rng);
    Factor f;
    f.id = static_cast<std::int32_t>(factors.size());
    f.scope = {i};
    f.table = {1.0, std::exp(-u)};
    factors.push_back(std::move(f));
  }
  // Pairwise Potts factors: horizontal row-major, then vertical row-major.
  auto add_pair = [&](std::int32_t i, std::int32_t j) {
    const double alpha = coupling(rng);
    const double off = std::exp(-alpha);
    Factor f;
    f.id = static_cast<std::int32_t>(factors.size());
    f.scope = {i, j};
    f.table = {1.0, off, off, 1.0};
    factors.push_back(std::move(f));
  };
  for (std::int32_t r = 0; r < n; ++r)
    for (std::int32_t col = 0; col + 1 < n; ++col) add_pair(vid(r, col), vid(r, col + 1));
  for (std::int32_t r = 0; r + 1 < n; ++r)
    for (std::int32_t col = 0; col < n; ++col) add_pair(vid(r, col), vid(r + 1, col));

  return FactorGraph(std::move(vars), std::move(factors));
}

std::string potts_generator_name() { return "mt19937_64"; }

}  // namespace loopybp
