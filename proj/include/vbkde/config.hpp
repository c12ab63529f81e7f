#pragma once

// JSON-configurable kernels and densities for the CLI.

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "density.hpp"
#include "kernel.hpp"

namespace vbkde {

/// Custom polynomial kernel from {"coefficients": [...], "half_width": T}.
inline Kernel kernel_from_json(const nlohmann::json& j) {
    auto coef = j.at("coefficients").get<std::vector<double>>();
    double hw = j.at("half_width").get<double>();
    return Kernel(std::move(coef), hw, j.value("name", std::string("custom")));
}

/// Mixture density from {"weights": [...], "means": [...], "sds": [...]}.
inline std::shared_ptr<const DensityModel> density_from_json(
    const nlohmann::json& j) {
    return std::make_shared<NormalMixtureDensity>(
        j.at("weights").get<std::vector<double>>(),
        j.at("means").get<std::vector<double>>(),
        j.at("sds").get<std::vector<double>>(),
        j.value("name", std::string("custom_mixture")));
}

}  // namespace vbkde
