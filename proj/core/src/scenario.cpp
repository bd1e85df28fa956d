#include "sivsq/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "sivsq/errors.hpp"
#include "sivsq/units.hpp"

namespace sivsq {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

struct Entry {
    std::string value;
    int line;
};

const std::set<std::string, std::less<>> kCoefficientKeys{"g_oat1", "g_oat2", "g_tats", "g_mix", "delta_s1",
                                                          "delta_s2"};
const std::set<std::string, std::less<>> kDriveKeys{"omega1", "omega2", "omega3", "omega4", "delta1",
                                                    "delta2", "delta3", "delta4", "nu",     "g_n"};
const std::set<std::string, std::less<>> kOtherKeys{
    "kind",    "n1",      "n2",   "gamma_m",          "gamma_eff",      "n_th",       "gamma_d",
    "dephasing_mode", "dissipator_placement", "t_max", "samples", "rtol", "steps_per_period", "outputs",
    "initial_state", "frame", "integrator", "n_ph_max"};
const std::set<std::string, std::less<>> kOutputs{"xi_s2",   "xi_r2",   "jx2",       "jx_mean",
                                                  "jy_mean", "jz_mean", "trace_err", "purity"};

class Reader {
public:
    explicit Reader(std::map<std::string, Entry> e) : e_(std::move(e)) {}

    bool has(const std::string& k) const { return e_.count(k) != 0; }

    template <class F>
    auto get(const std::string& k, F&& parse) const {
        const auto& en = e_.at(k);
        try {
            return parse(en.value);
        } catch (const InvalidArgument& ex) {
            throw ConfigError(ex.what(), en.line, k);
        }
    }

    [[noreturn]] void fail(const std::string& k, const std::string& msg) const {
        auto it = e_.find(k);
        throw ConfigError(msg, it == e_.end() ? 0 : it->second.line, k);
    }

    double freq(const std::string& k) const { return get(k, [](const std::string& v) { return parse_frequency(v); }); }
    double real(const std::string& k) const { return get(k, [](const std::string& v) { return parse_real(v); }); }
    int integer(const std::string& k) const { return get(k, [](const std::string& v) { return parse_int(v); }); }
    const std::string& text(const std::string& k) const { return e_.at(k).value; }

private:
    std::map<std::string, Entry> e_;
};

ScenarioKind parse_kind(const std::string& v) {
    if (v == "oat") return ScenarioKind::oat;
    if (v == "tats") return ScenarioKind::tats;
    if (v == "mixed") return ScenarioKind::mixed;
    if (v == "general") return ScenarioKind::general;
    if (v == "from-drives") return ScenarioKind::from_drives;
    throw InvalidArgument("unknown kind '" + v + "' (oat, tats, mixed, general, from-drives)");
}

}  // namespace

std::string_view scenario_kind_name(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::oat: return "oat";
        case ScenarioKind::tats: return "tats";
        case ScenarioKind::mixed: return "mixed";
        case ScenarioKind::general: return "general";
        case ScenarioKind::from_drives: return "from-drives";
    }
    return "?";
}

Scenario Scenario::with_n_tot(int n_tot) const {
    Scenario s = *this;
    const auto p = EnsemblePair::split(n_tot);
    s.n1 = p.n1();
    s.n2 = p.n2();
    s.name = name + "_n" + std::to_string(n_tot);
    return s;
}

Scenario parse_config(std::string_view text, std::string name) {
    std::map<std::string, Entry> entries;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(std::string_view(raw).substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigError("missing key", line_no);
        if (!kCoefficientKeys.count(key) && !kDriveKeys.count(key) && !kOtherKeys.count(key))
            throw ConfigError("unknown key", line_no, key);
        if (value.empty()) throw ConfigError("missing value", line_no, key);
        if (entries.count(key)) throw ConfigError("duplicate key", line_no, key);
        entries.emplace(key, Entry{value, line_no});
    }
    const Reader r(entries);

    Scenario s;
    s.name = std::move(name);
    if (!r.has("kind")) throw ConfigError("missing required key", 0, "kind");
    s.kind = r.get("kind", [](const std::string& v) { return parse_kind(v); });
    for (const char* k : {"n1", "n2", "t_max", "samples"})
        if (!r.has(k)) throw ConfigError("missing required key", 0, k);
    s.n1 = r.integer("n1");
    s.n2 = r.integer("n2");
    if (s.n1 < 1) r.fail("n1", "must be >= 1");
    if (s.n2 < 1) r.fail("n2", "must be >= 1");

    bool any_coeff = false, any_drive = false;
    for (const auto& [k, e] : entries) {
        any_coeff = any_coeff || kCoefficientKeys.count(k);
        any_drive = any_drive || kDriveKeys.count(k);
    }
    if (any_coeff && any_drive)
        throw ConfigError("coefficients and drive parameters are mutually exclusive", 0, "kind");
    if (!any_coeff && !any_drive) throw ConfigError("either coefficients or drive parameters are required", 0, "kind");

    if (any_coeff) {
        if (s.kind == ScenarioKind::general || s.kind == ScenarioKind::from_drives)
            r.fail("kind", "kind '" + std::string(scenario_kind_name(s.kind)) + "' requires drive parameters");
        const std::map<ScenarioKind, std::set<std::string>> allowed{
            {ScenarioKind::oat, {"g_oat1", "g_oat2"}},
            {ScenarioKind::tats, {"g_tats"}},
            {ScenarioKind::mixed, {"g_mix"}}};
        for (const auto& [k, e] : entries)
            if (kCoefficientKeys.count(k) && k.rfind("delta_s", 0) != 0 && !allowed.at(s.kind).count(k))
                r.fail(k, "not a coefficient of kind '" + std::string(scenario_kind_name(s.kind)) + "'");
        Coefficients c;
        auto opt = [&](const char* k, double& dst) {
            if (r.has(k)) dst = r.freq(k);
        };
        opt("g_oat1", c.g_oat1);
        opt("g_oat2", c.g_oat2);
        opt("g_tats", c.g_tats);
        opt("g_mix", c.g_mix);
        opt("delta_s1", c.delta_s1);
        opt("delta_s2", c.delta_s2);
        s.coefficients = c;
    } else {
        DriveParams d;
        for (const char* k : {"nu", "g_n"})
            if (!r.has(k)) throw ConfigError("missing required drive key", 0, k);
        for (int i = 0; i < 4; ++i) {
            const std::string ko = "omega" + std::to_string(i + 1), kd = "delta" + std::to_string(i + 1);
            if (r.has(ko)) d.omega[i] = r.freq(ko);
            if (r.has(kd)) d.delta[i] = r.freq(kd);
        }
        d.nu = r.freq("nu");
        d.g_n = r.freq("g_n");
        try {
            d.validate();
        } catch (const InvalidArgument& ex) {
            r.fail("g_n", ex.what());
        }
        s.drives = d;
    }

    if (r.has("gamma_m") && r.has("gamma_eff")) r.fail("gamma_eff", "gamma_m and gamma_eff are mutually exclusive");
    if (r.has("gamma_m")) {
        if (!s.drives) r.fail("gamma_m", "gamma_m needs drive parameters to derive lambda/Delta_s; use gamma_eff");
        s.gamma_m = r.freq("gamma_m");
        if (*s.gamma_m < 0.0) r.fail("gamma_m", "must be >= 0");
    }
    if (r.has("gamma_eff")) {
        s.gamma_eff = r.freq("gamma_eff");
        if (*s.gamma_eff < 0.0) r.fail("gamma_eff", "must be >= 0");
    }
    if (r.has("n_th")) {
        s.n_th = r.real("n_th");
        if (s.n_th < 0.0) r.fail("n_th", "must be >= 0");
    }
    if (r.has("gamma_d")) {
        s.gamma_d = r.freq("gamma_d");
        if (s.gamma_d < 0.0) r.fail("gamma_d", "must be >= 0");
    }
    if (r.has("dephasing_mode")) {
        const auto& v = r.text("dephasing_mode");
        if (v == "collective-approx")
            s.dephasing_mode = DephasingMode::collective_approx;
        else if (v == "off")
            s.dephasing_mode = DephasingMode::off;
        else
            r.fail("dephasing_mode", "expected collective-approx or off");
    }
    if (r.has("dissipator_placement")) {
        const auto& v = r.text("dissipator_placement");
        if (v == "per-segment")
            s.placement = Placement::per_segment;
        else if (v == "total")
            s.placement = Placement::total;
        else
            r.fail("dissipator_placement", "expected per-segment or total");
    }

    s.t_max = r.get("t_max", [](const std::string& v) { return parse_time(v); });
    if (!(s.t_max > 0.0)) r.fail("t_max", "must be > 0");
    s.samples = r.integer("samples");
    if (s.samples < 2) r.fail("samples", "must be >= 2");

    if (r.has("rtol")) {
        s.integrator.rtol = r.real("rtol");
        if (!(s.integrator.rtol > 0.0)) r.fail("rtol", "must be > 0");
    }
    if (r.has("steps_per_period")) {
        s.integrator.steps_per_period = r.integer("steps_per_period");
        if (s.integrator.steps_per_period < 1) r.fail("steps_per_period", "must be >= 1");
    }
    if (r.has("integrator")) {
        const auto& v = r.text("integrator");
        if (v == "rk4")
            s.integrator.method = Method::rk4;
        else if (v == "adaptive")
            s.integrator.method = Method::adaptive;
        else
            r.fail("integrator", "expected rk4 or adaptive");
    }
    if (r.has("outputs")) {
        s.outputs.clear();
        std::stringstream ss(r.text("outputs"));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            if (!kOutputs.count(item)) r.fail("outputs", "unknown output '" + item + "'");
            s.outputs.push_back(item);
        }
    }
    if (r.has("initial_state")) {
        const auto& v = r.text("initial_state");
        if (v == "x")
            s.initial_state = InitialState::x;
        else if (v == "down")
            s.initial_state = InitialState::down;
        else if (v == "up")
            s.initial_state = InitialState::up;
        else
            r.fail("initial_state", "expected x, down or up");
    }
    if (r.has("frame")) {
        const auto& v = r.text("frame");
        if (v == "co-rotating")
            s.frame = Frame::co_rotating;
        else if (v == "lab")
            s.frame = Frame::lab;
        else
            r.fail("frame", "expected co-rotating or lab");
    }
    if (r.has("n_ph_max")) {
        s.n_ph_max = r.integer("n_ph_max");
        if (s.n_ph_max < 2) r.fail("n_ph_max", "must be >= 2");
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open scenario file " + path.string());
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_config(buf.str(), path.stem().string());
}

namespace {

HamiltonianSpec drive_hamiltonian(const Scenario& s, const CouplingSet& c) {
    const auto pair = s.pair();
    switch (s.kind) {
        case ScenarioKind::oat: return build_oat(c, pair);
        case ScenarioKind::tats: return build_tats(c, pair);
        case ScenarioKind::mixed: return build_mixed(c, pair);
        case ScenarioKind::general: return build_h_eff(c, pair);
        case ScenarioKind::from_drives:
            switch (classify(c)) {
                case InteractionKind::oat: return build_oat(c, pair);
                case InteractionKind::tats: return build_tats(c, pair);
                case InteractionKind::mixed: return build_mixed(c, pair);
                case InteractionKind::general: return build_h_eff(c, pair);
            }
    }
    throw InvalidArgument("unsupported scenario kind");
}

}  // namespace

HamiltonianSpec scenario_hamiltonian(const Scenario& s) {
    const auto pair = s.pair();
    HamiltonianSpec h;
    if (s.coefficients) {
        const auto& c = *s.coefficients;
        switch (s.kind) {
            case ScenarioKind::oat: h = build_oat(pair, c.g_oat1, c.g_oat2, c.delta_s1, c.delta_s2); break;
            case ScenarioKind::tats: h = build_tats(pair, c.g_tats, c.delta_s1, c.delta_s2); break;
            case ScenarioKind::mixed: h = build_mixed(pair, c.g_mix, c.delta_s1, c.delta_s2); break;
            default: throw InvalidArgument("coefficient scenarios must be oat, tats or mixed");
        }
    } else {
        h = drive_hamiltonian(s, effective_couplings(*s.drives));
    }
    return s.frame == Frame::co_rotating ? co_rotating(h) : h;
}

std::vector<DissipatorSpec> scenario_dissipators(const Scenario& s) {
    const auto pair = s.pair();
    double r1 = 0.0, r2 = 0.0;
    if (s.gamma_eff) {
        r1 = r2 = *s.gamma_eff;
    } else if (s.gamma_m) {
        const auto c = effective_couplings(*s.drives);
        r1 = effective_decay(*s.gamma_m, std::max(std::abs(c.lam1), std::abs(c.Lam1)), c.delta_s);
        r2 = effective_decay(*s.gamma_m, std::max(std::abs(c.lam2), std::abs(c.Lam2)), c.delta_s);
    }
    if (s.placement == Placement::total) r1 = std::max(r1, r2);
    auto out = decay_dissipators(pair, r1, r2, s.n_th, s.placement);
    auto deph = dephasing_dissipators(s.gamma_d, pair, s.dephasing_mode);
    out.insert(out.end(), deph.begin(), deph.end());
    return out;
}

StateVector scenario_initial_state(const Scenario& s) {
    InitialState init = InitialState::x;
    if (s.initial_state) {
        init = *s.initial_state;
    } else if (s.kind == ScenarioKind::tats || s.kind == ScenarioKind::mixed) {
        init = InitialState::down;
    } else if (s.kind == ScenarioKind::from_drives && s.drives) {
        const auto k = classify(effective_couplings(*s.drives));
        if (k == InteractionKind::tats || k == InteractionKind::mixed) init = InitialState::down;
    }
    const auto pair = s.pair();
    Vector v = Vector::Zero(pair.dim());
    switch (init) {
        case InitialState::down: v(0) = 1.0; return StateVector(v);
        case InitialState::up: v(pair.dim() - 1) = 1.0; return StateVector(v);
        case InitialState::x: break;
    }
    return product_state(coherent_spin_state(s.n1, 0.25 * kTwoPi, 0.0), coherent_spin_state(s.n2, 0.25 * kTwoPi, 0.0));
}

FullModelParams scenario_full_model(const Scenario& s) {
    if (!s.drives) throw ConfigError("oracle-check needs drive parameters", 0, "kind");
    FullModelParams p;
    p.drives = *s.drives;
    p.n1 = s.n1;
    p.n2 = s.n2;
    p.n_ph_max = s.n_ph_max;
    p.gamma_m = s.gamma_m.value_or(0.0);
    try {
        p.validate();
    } catch (const InvalidArgument& ex) {
        throw ConfigError(ex.what(), 0, "n1");
    }
    return p;
}

}  // namespace sivsq
