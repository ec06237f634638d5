#pragma once

#include <string>
#include <vector>

#include "dafermos/coupling_model.hpp"

namespace dafermos {

// Both half-models are Burgers, f(w) = w^2 / 2 with w = u, on u in [-1, 1].
ScalarCouplingModel burgers_identical_model();

// Linear fluxes with speed +1 on the left half and -1 on the right, so characteristics meet at the interface.
ScalarCouplingModel linear_advection_pair_model();

// p-system with p_-(tau) = tau^-1.4 / 1.4 and p_+ = 1.1 p_-, tau in [0.5, 1.5], centred at (1, 0).
SystemCouplingModel p_system_preset(const SystemModelOptions& options = {});

std::vector<std::string> scalar_preset_names();
ScalarCouplingModel scalar_preset(const std::string& name);

}  // namespace dafermos
