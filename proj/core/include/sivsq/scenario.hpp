#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sivsq/dynamics.hpp"
#include "sivsq/fullmodel.hpp"
#include "sivsq/model.hpp"

namespace sivsq {

enum class ScenarioKind { oat, tats, mixed, general, from_drives };
enum class InitialState { x, down, up };
enum class Frame { co_rotating, lab };

struct Coefficients {
    double g_oat1 = 0.0, g_oat2 = 0.0;
    double g_tats = 0.0;
    double g_mix = 0.0;
    double delta_s1 = 0.0, delta_s2 = 0.0;
};

struct Scenario {
    std::string name = "scenario";
    ScenarioKind kind = ScenarioKind::oat;
    int n1 = 1, n2 = 1;
    std::optional<Coefficients> coefficients;
    std::optional<DriveParams> drives;

    std::optional<double> gamma_m;
    std::optional<double> gamma_eff;
    double n_th = 0.0;
    double gamma_d = 0.0;
    DephasingMode dephasing_mode = DephasingMode::collective_approx;
    Placement placement = Placement::per_segment;

    double t_max = 0.0;
    int samples = 0;
    IntegratorSettings integrator;
    std::vector<std::string> outputs{"xi_s2", "xi_r2"};

    std::optional<InitialState> initial_state;  // x for oat/general, down otherwise
    Frame frame = Frame::co_rotating;
    int n_ph_max = 3;

    EnsemblePair pair() const { return EnsemblePair(n1, n2); }
    int n_tot() const { return n1 + n2; }
    // same scenario with N_tot split as (ceil, floor)
    Scenario with_n_tot(int n_tot) const;
};

std::string_view scenario_kind_name(ScenarioKind k);

// key = value lines, '#' comments; throws ConfigError
Scenario parse_config(std::string_view text, std::string name = "scenario");
Scenario load_scenario(const std::filesystem::path& path);

// effective Hamiltonian of the scenario in its working frame
HamiltonianSpec scenario_hamiltonian(const Scenario& s);
std::vector<DissipatorSpec> scenario_dissipators(const Scenario& s);
StateVector scenario_initial_state(const Scenario& s);
FullModelParams scenario_full_model(const Scenario& s);

}  // namespace sivsq
