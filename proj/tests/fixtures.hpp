#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dafermos/color_profile.hpp"
#include "dafermos/wave_measures.hpp"

namespace dafermos::testing {

// Two separated families of class L with a narrow color layer (p = 2) sitting inside the second band.
inline std::vector<LadderPoint> two_band_ladder(const std::vector<double>& eps_ladder) {
    const double M = 3.0;
    std::vector<LadderPoint> ladder;
    for (double eps : eps_ladder) {
        const Grid g(M, std::max<std::size_t>(2048, static_cast<std::size_t>(std::ceil(80.0 * M / eps))));
        GridFunction mu1(g), mu2(g);
        for (std::size_t k = 0; k < g.n; ++k) {
            const double x = g.x(k);
            mu1[k] = (1.0 + 0.1 * std::sin(x)) * (-1.5 + 0.1 * std::tanh(x) - x);
            mu2[k] = (1.0 + 0.1 * std::cos(x)) * (0.1 * std::tanh(x) - x);
        }
        ladder.push_back({build_phi_star({mu1, mu2}, eps), sample_psi(ColorProfile(eps, 2.0, M), g)});
    }
    return ladder;
}

inline BandInfo two_band_info() { return {{-1.6, -0.1}, {-1.4, 0.1}, {0.9, 0.9}}; }

}  // namespace dafermos::testing
