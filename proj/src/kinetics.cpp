#include "growfem/kinetics.hpp"

#include <algorithm>
#include <cmath>

#include "growfem/error.hpp"

namespace growfem {

void validate_network(const NetworkSpec& net, const std::set<std::string>& geometry_subdomains) {
    for (const auto& id : net.subdomains)
        if (!geometry_subdomains.count(id))
            throw Error("network subdomain '" + id + "' not present in the geometry");
    for (const auto& id : {net.production_region_A, net.production_region_C, net.initial_region_A})
        if (std::find(net.subdomains.begin(), net.subdomains.end(), id) == net.subdomains.end())
            throw Error("network region '" + id + "' not among the declared subdomains");
}

void validate_params(const Params& p) {
    for (const double K : {p.hill.K_BA, p.hill.K_AB, p.hill.K_CB, p.hill.K_AC})
        if (!(K > 0))
            throw Error("Hill constants must be positive");
    const auto& r = p.rate;
    for (const double v : {r.rho_A, r.rho_B, r.rho_C, r.d_A, r.d_B, r.d_C, r.D_diff})
        if (!(v >= 0) || !std::isfinite(v))
            throw Error("rate parameters must be nonnegative and finite");
    for (const auto& D : {r.D_A, r.D_B, r.D_C})
        if (D && (!(*D >= 0) || !std::isfinite(*D)))
            throw Error("per-species diffusion overrides must be nonnegative and finite");
}

double hill_act(double x, double K) {
    x = std::max(x, 0.0);
    return x * x / (K * K + x * x);
}

double hill_inh(double x, double K) {
    x = std::max(x, 0.0);
    return K * K / (K * K + x * x);
}

namespace {

void check_label(const std::string& label, const NetworkSpec& net) {
    if (std::find(net.subdomains.begin(), net.subdomains.end(), label) == net.subdomains.end())
        throw Error("unknown subdomain label '" + label + "'");
}

} // namespace

std::array<double, 3> effective_production(double A, double B, double C, const std::string& label,
                                           const NetworkSpec& net, const Params& p) {
    check_label(label, net);
    const double I1 = label == net.production_region_A ? 1.0 : 0.0;
    const double I3 = label == net.production_region_C ? 1.0 : 0.0;
    const double P_A = p.rate.rho_A * hill_inh(B, p.hill.K_BA) * I1;
    const double P_B = p.rate.rho_B * hill_act(A, p.hill.K_AB) * hill_inh(C, p.hill.K_CB);
    const double P_C = p.rate.rho_C * hill_act(A, p.hill.K_AC) * I3;
    return {P_A, P_B, P_C};
}

std::array<double, 3> reaction_rates(double A, double B, double C, const std::string& label, const NetworkSpec& net,
                                     const Params& p) {
    const auto prod = effective_production(A, B, C, label, net, p);
    return {prod[0] - p.rate.d_A * A, prod[1] - p.rate.d_B * B, prod[2] - p.rate.d_C * C};
}

} // namespace growfem
