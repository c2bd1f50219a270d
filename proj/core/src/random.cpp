#include "pmiflow/random.hpp"

#include <cmath>
#include <numbers>

#include "pmiflow/errors.hpp"

namespace pmiflow {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngSeed derive_seed(RngSeed parent, std::uint64_t stream) noexcept {
  return RngSeed{mix64(mix64(parent.value) ^ mix64(stream + 0x632be59bd9b4e019ULL))};
}

std::mt19937_64 make_engine(RngSeed seed) { return std::mt19937_64(seed.value); }

std::vector<StateVec> sample_standard_normal(std::size_t n, RngSeed seed,
                                             std::size_t count) {
  if (n == 0) throw InvalidArgument("sample_standard_normal: n must be >= 1");
  if (count == 0) throw InvalidArgument("sample_standard_normal: count must be >= 1");
  auto engine = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<StateVec> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    StateVec z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = normal(engine);
    out.push_back(std::move(z));
  }
  return out;
}

double hashed_normal(std::uint64_t key) noexcept {
  const std::uint64_t a = mix64(key);
  const std::uint64_t b = mix64(a ^ 0xd1b54a32d192ed03ULL);
  // 53-bit uniforms; u1 in (0, 1] keeps the log finite.
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace pmiflow
