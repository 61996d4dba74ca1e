#include "fmsync/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fmsync/errors.hpp"

namespace fmsync {

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
constexpr double kCoordFloor = 1e-12;

double radical_inverse(std::uint64_t index, int base) {
    double result = 0.0;
    double f = 1.0 / base;
    while (index > 0) {
        result += f * static_cast<double>(index % base);
        index /= base;
        f /= base;
    }
    return result;
}

double clamp_coord(double u) { return std::clamp(u, kCoordFloor, 1.0 - kCoordFloor); }

}  // namespace

HaltonSequence::HaltonSequence(int dims, std::uint64_t seed) : shift_(dims) {
    if (dims <= 0 || dims > static_cast<int>(std::size(kPrimes))) {
        throw Error(ErrorKind::DimensionMismatch, "Halton dimension out of range");
    }
    std::mt19937_64 rng(seed);
    for (int d = 0; d < dims; ++d) shift_(d) = static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void HaltonSequence::point(std::uint64_t index, std::span<double> out) const {
    for (int d = 0; d < dims(); ++d) {
        const double u = radical_inverse(index + 1, kPrimes[d]) + shift_(d);
        out[d] = u - std::floor(u);
    }
}

int direction_coords(int q) noexcept { return 2 * ((q + 1) / 2); }

SmallVec unit_direction(std::span<const double> u, int q) {
    SmallVec v(q);
    for (int k = 0; k < q; k += 2) {
        const double r = std::sqrt(-2.0 * std::log(clamp_coord(u[k])));
        const double phi = 2.0 * std::numbers::pi * u[k + 1];
        v(k) = r * std::cos(phi);
        if (k + 1 < q) v(k + 1) = r * std::sin(phi);
    }
    const double norm = v.norm();
    if (!(norm > 0.0)) {
        v.setZero();
        v(0) = 1.0;
        return v;
    }
    return v / norm;
}

double sampled_supremum(int dims, const SamplingOptions& options, const SampledObjective& objective) {
    if (options.samples <= 0) throw Error(ErrorKind::Config, "sampling needs a positive sample count");
    const HaltonSequence seq(dims, options.seed);

    struct Candidate {
        double value;
        std::vector<double> coords;
    };
    std::vector<Candidate> best;
    const auto keep = static_cast<std::size_t>(std::max(options.refine_top, 1));
    auto consider = [&](double value, const std::vector<double>& coords) {
        if (!std::isfinite(value)) return;
        if (best.size() < keep) {
            best.push_back({value, coords});
        } else {
            auto worst = std::min_element(best.begin(), best.end(),
                                          [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
            if (value > worst->value) *worst = {value, coords};
        }
    };

    std::vector<double> u(dims);
    for (int s = 0; s < options.samples; ++s) {
        seq.point(static_cast<std::uint64_t>(s), u);
        consider(objective(u), u);
    }
    if (best.empty()) throw Error(ErrorKind::NumericalConditioning, "sampled objective is never finite");

    double sup = -std::numeric_limits<double>::infinity();
    if (options.refine_top <= 0) {
        for (const auto& c : best) sup = std::max(sup, c.value);
        return sup;
    }
    // compass search inside the unit cube
    for (Candidate& c : best) {
        double step = 0.05;
        double value = c.value;
        std::vector<double> trial = c.coords;
        int evaluations = 0;
        while (step > 1e-7 && evaluations < 4000) {
            bool improved = false;
            for (int d = 0; d < dims; ++d) {
                for (double dir : {1.0, -1.0}) {
                    const double old = trial[d];
                    trial[d] = std::clamp(old + dir * step, 0.0, 1.0);
                    const double v = objective(trial);
                    ++evaluations;
                    if (std::isfinite(v) && v > value) {
                        value = v;
                        improved = true;
                    } else {
                        trial[d] = old;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        sup = std::max(sup, value);
    }
    return sup;
}

}  // namespace fmsync
