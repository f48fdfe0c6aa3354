#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace growfem {

/// Half-saturation constants of the three-species network; Hill exponent is 2.
struct HillParams {
    double K_BA = 0.2;
    double K_AB = 0.125;
    double K_CB = 0.5;
    double K_AC = 0.025;
};

/// Production, degradation, and diffusion rates in nondimensional units
/// (characteristic time T = 3600 s, length L = 150 um). Per-species diffusion
/// overrides fall back to the shared D_diff when unset.
struct RateParams {
    double rho_A = 0.36;
    double rho_B = 18.0;
    double rho_C = 72.0;
    double d_A = 3.6e-3;
    double d_B = 3.6e-3;
    double d_C = 3.6e-3;
    double D_diff = 3600.0;
    std::optional<double> D_A, D_B, D_C;

    std::array<double, 3> diffusion() const {
        return {D_A.value_or(D_diff), D_B.value_or(D_diff), D_C.value_or(D_diff)};
    }
};

struct Params {
    RateParams rate;
    HillParams hill;
};

/// Species order is A, B, C throughout.
struct NetworkSpec {
    std::vector<std::string> subdomains = {"domain1", "domain2", "domain3"};
    std::string production_region_A = "domain1"; // B is produced everywhere
    std::string production_region_C = "domain3";
    std::string initial_region_A = "domain3";
    double initial_value_A = 1.0;
};

void validate_network(const NetworkSpec& net, const std::set<std::string>& geometry_subdomains);
void validate_params(const Params& p);

/// x^2 / (K^2 + x^2); negative x is clamped to 0.
double hill_act(double x, double K);

/// K^2 / (K^2 + x^2); complements hill_act to 1 at equal arguments.
double hill_inh(double x, double K);

/// Full rates (production minus degradation) for a node carrying `label`.
std::array<double, 3> reaction_rates(double A, double B, double C, const std::string& label, const NetworkSpec& net,
                                     const Params& p);

/// Production terms only, with the subdomain indicators applied crisply.
std::array<double, 3> effective_production(double A, double B, double C, const std::string& label,
                                           const NetworkSpec& net, const Params& p);

} // namespace growfem
