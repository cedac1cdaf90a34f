#include "dunkl/rng.hpp"

#include <cmath>
#include <numbers>

#include "dunkl/error.hpp"

namespace dunkl {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// 53 random bits mapped to the open interval (0, 1).
double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

double standard_normal(std::uint64_t seed, std::uint64_t path, std::uint32_t step, std::uint32_t coord) noexcept {
  // One Philox block gives a Box-Muller pair; coordinates 2j and 2j+1 share block j.
  const PhiloxCounter ctr{step, coord / 2, static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
  const PhiloxKey key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const PhiloxCounter r = philox4x32_10(ctr, key);
  const double u1 = to_open_unit(r[0], r[1]);
  const double u2 = to_open_unit(r[2], r[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (coord % 2 == 0) ? radius * std::cos(angle) : radius * std::sin(angle);
}

BrownianLattice::BrownianLattice(std::uint64_t seed, std::uint64_t path_index, std::int64_t n_fine, double horizon,
                                 int dim)
    : seed_(seed), path_(path_index), n_fine_(n_fine), horizon_(horizon), dim_(dim) {
  if (n_fine < 1 || n_fine > (std::int64_t{1} << 31))
    throw Error(ErrorCode::invalid_parameter, "Brownian lattice: n_fine must be in [1, 2^31]");
  if (!(horizon > 0.0)) throw Error(ErrorCode::invalid_parameter, "Brownian lattice: horizon must be > 0");
  if (dim < 1) throw Error(ErrorCode::invalid_parameter, "Brownian lattice: dimension must be >= 1");
}

void BrownianLattice::fine_increments(std::span<double> out) const {
  const auto d = static_cast<std::size_t>(dim_);
  if (out.size() != static_cast<std::size_t>(n_fine_) * d)
    throw Error(ErrorCode::invalid_parameter, "Brownian lattice: output buffer has wrong size");
  const double scale = std::sqrt(horizon_ / static_cast<double>(n_fine_));
  for (std::int64_t j = 0; j < n_fine_; ++j) {
    // Generate Box-Muller pairs once per block rather than once per coordinate.
    for (std::size_t c = 0; c < d; c += 2) {
      const PhiloxCounter ctr{static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(c / 2),
                              static_cast<std::uint32_t>(path_), static_cast<std::uint32_t>(path_ >> 32)};
      const PhiloxKey key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
      const PhiloxCounter r = philox4x32_10(ctr, key);
      const double radius = std::sqrt(-2.0 * std::log(to_open_unit(r[0], r[1])));
      const double angle = 2.0 * std::numbers::pi * to_open_unit(r[2], r[3]);
      double* row = out.data() + static_cast<std::size_t>(j) * d;
      row[c] = scale * (radius * std::cos(angle));
      if (c + 1 < d) row[c + 1] = scale * (radius * std::sin(angle));
    }
  }
}

std::vector<double> BrownianLattice::fine_increments() const {
  std::vector<double> out(static_cast<std::size_t>(n_fine_) * static_cast<std::size_t>(dim_));
  fine_increments(out);
  return out;
}

void BrownianLattice::coarse_increments(std::span<const double> fine, std::int64_t n, std::span<double> out) const {
  if (n < 1 || n_fine_ % n != 0)
    throw Error(ErrorCode::invalid_parameter, "Brownian lattice: coarse resolution must divide n_fine");
  const auto d = static_cast<std::size_t>(dim_);
  if (fine.size() != static_cast<std::size_t>(n_fine_) * d || out.size() != static_cast<std::size_t>(n) * d)
    throw Error(ErrorCode::invalid_parameter, "Brownian lattice: buffer has wrong size");
  const std::int64_t ratio = n_fine_ / n;
  for (std::int64_t l = 0; l < n; ++l) {
    double* row = out.data() + static_cast<std::size_t>(l) * d;
    std::fill(row, row + d, 0.0);
    for (std::int64_t j = l * ratio; j < (l + 1) * ratio; ++j)
      for (std::size_t c = 0; c < d; ++c) row[c] += fine[static_cast<std::size_t>(j) * d + c];
  }
}

std::vector<double> BrownianLattice::coarse_increments(std::int64_t n) const {
  const auto fine = fine_increments();
  std::vector<double> out(static_cast<std::size_t>(n) * static_cast<std::size_t>(dim_));
  coarse_increments(fine, n, out);
  return out;
}

}  // namespace dunkl
