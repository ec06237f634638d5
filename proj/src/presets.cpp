#include "dafermos/presets.hpp"

#include <cmath>

namespace dafermos {

namespace {

RealFn identity() {
    return [](double u) { return u; };
}
RealFn one() {
    return [](double) { return 1.0; };
}

HalfModel linear_half(double speed) {
    return {identity(), [speed](double w) { return speed * w; }, one(), [speed](double) { return speed; }};
}

}  // namespace

ScalarCouplingModel burgers_identical_model() {
    HalfModel burgers{identity(), [](double w) { return 0.5 * w * w; }, one(), [](double w) { return w; }};
    return build_scalar_model(burgers, burgers, {-1.0, 1.0});
}

ScalarCouplingModel linear_advection_pair_model() {
    return build_scalar_model(linear_half(1.0), linear_half(-1.0), {-1.0, 1.0});
}

SystemCouplingModel p_system_preset(const SystemModelOptions& options) {
    constexpr double g = 1.4;
    PressureLaw minus{[](double tau) { return std::pow(tau, -g) / g; }, [](double tau) { return -std::pow(tau, -g - 1.0); }};
    PressureLaw plus{[](double tau) { return 1.1 * std::pow(tau, -g) / g; },
                     [](double tau) { return -1.1 * std::pow(tau, -g - 1.0); }};
    return build_p_system_model(minus, plus, {0.5, 1.5}, options);
}

std::vector<std::string> scalar_preset_names() { return {"burgers-identical", "linear-advection-pair"}; }

ScalarCouplingModel scalar_preset(const std::string& name) {
    if (name == "burgers-identical") return burgers_identical_model();
    if (name == "linear-advection-pair") return linear_advection_pair_model();
    throw ModelError("unknown scalar preset '" + name + "'");
}

}  // namespace dafermos
