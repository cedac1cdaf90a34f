#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace dunkl {

/// Philox4x32-10 counter-based bijection (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept;

/// Standard normal variate determined entirely by (seed, path, step, coordinate).
double standard_normal(std::uint64_t seed, std::uint64_t path, std::uint32_t step, std::uint32_t coord) noexcept;

/// Brownian increments of one path on a dyadic fine grid. Coarser increments are
/// the sequential sums of the fine ones over each coarse cell.
class BrownianLattice {
 public:
  BrownianLattice(std::uint64_t seed, std::uint64_t path_index, std::int64_t n_fine, double horizon, int dim);

  std::int64_t n_fine() const noexcept { return n_fine_; }
  int dim() const noexcept { return dim_; }

  /// n_fine x d row-major increments.
  void fine_increments(std::span<double> out) const;
  std::vector<double> fine_increments() const;

  /// Sums fine increments over cells of n_fine / n consecutive fine steps.
  void coarse_increments(std::span<const double> fine, std::int64_t n, std::span<double> out) const;
  std::vector<double> coarse_increments(std::int64_t n) const;

 private:
  std::uint64_t seed_;
  std::uint64_t path_;
  std::int64_t n_fine_;
  double horizon_;
  int dim_;
};

}  // namespace dunkl
