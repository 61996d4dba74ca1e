#include "fmsync/noise.hpp"

#include "fmsync/errors.hpp"

namespace fmsync {

SmallVec inject_noise(const SmallVec& signal, double percent, std::mt19937_64& rng) {
    if (!(percent >= 0.0)) throw Error(ErrorKind::Config, "noise percent must be nonnegative");
    const double amplitude = percent * signal.norm() / 100.0;
    SmallVec out = signal;
    for (Eigen::Index k = 0; k < out.size(); ++k) out(k) += amplitude * (2.0 * unit_uniform(rng) - 1.0);
    return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace fmsync
