#include "snmpc/rng.hpp"

#include <cmath>

#include "snmpc/error.hpp"

namespace snmpc::sde {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  const std::uint64_t a = mix64(seed);
  const std::uint64_t b = mix64(a ^ mix64(stream_id + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

WienerStream::WienerStream(std::uint64_t seed, std::uint64_t stream_id, double dt)
    : seed_(seed),
      stream_id_(stream_id),
      dt_(dt),
      sqrt_dt_(std::sqrt(dt)),
      engine_(make_engine(seed, stream_id)) {
  if (!(dt > 0.0)) throw ConfigError("wiener stream: dt must be positive");
}

void WienerStream::increment(Eigen::Ref<Eigen::VectorXd> out) {
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = sqrt_dt_ * normal_(engine_);
}

}  // namespace snmpc::sde
