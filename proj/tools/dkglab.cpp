// dkglab: command-line front end for single runs, mass sweeps and diagnostics.

#include "dkg/lab/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>

namespace {

using namespace dkg;
using namespace dkg::lab;

constexpr int exit_config = 2;
constexpr int exit_blowup = 3;

struct Common {
    std::string config_path;
    std::string out = "dkglab_out";
    int workers = 1;
    bool resume = false;
};

ExperimentConfig load(const Common& o) {
    ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
    c.validate();
    return c;
}

std::string out_path(const Common& o, const std::string& name) {
    std::filesystem::create_directories(o.out);
    return (std::filesystem::path(o.out) / name).string();
}

template <typename State>
void write_reports(const Trajectory<State>& traj, const std::string& path) {
    std::string text = "step,t,l2_drift,charge,max_psi,max_field\r\n";
    for (const auto& r : traj.reports)
        text += std::to_string(r.step) + "," + lab::detail::csv_number(r.t) + "," + lab::detail::csv_number(r.l2_drift) + "," +
                lab::detail::csv_number(r.charge) + "," + lab::detail::csv_number(r.max_psi) + "," +
                lab::detail::csv_number(r.max_field) + "\r\n";
    lab::detail::write_text(path, text);
}

double first_mass(const ExperimentConfig& c, double requested) {
    if (requested > 0.0) return requested;
    if (c.masses.empty()) throw ConfigError("no mass given and the mass list is empty");
    return c.masses.front();
}

int evolve_dkg_cmd(const Common& o, double mass_opt) {
    const ExperimentConfig c = load(o);
    const double mass = first_mass(c, mass_opt);
    auto traj = evolve(initial_dkg_state(c, mass), c.t_forward, c.dt, lab::detail::steps_per_sample(c, c.dt));
    write_reports(traj, out_path(o, "evolve_dkg.csv"));
    snapshot_save(traj.samples.back(), out_path(o, "dkg_final.snap"), {{"config", to_text(c)}});
    const auto& last = traj.reports.empty() ? StepReport{} : traj.reports.back();
    std::printf("t=%.6g mass=%g l2_drift=%.3e max_psi=%.6g max_field=%.6g\n", traj.samples.back().t, mass,
                last.l2_drift, last.max_psi, last.max_field);
    return 0;
}

int evolve_nld_cmd(const Common& o) {
    const ExperimentConfig c = load(o);
    auto traj = evolve(initial_nld_state(c), c.t_forward, c.dt, lab::detail::steps_per_sample(c, c.dt));
    write_reports(traj, out_path(o, "evolve_nld.csv"));
    snapshot_save(traj.samples.back(), out_path(o, "nld_final.snap"), {{"config", to_text(c)}});
    const auto& last = traj.reports.empty() ? StepReport{} : traj.reports.back();
    std::printf("t=%.6g l2_drift=%.3e max_psi=%.6g\n", traj.samples.back().t, last.l2_drift, last.max_psi);
    return 0;
}

void print_sweep(const SweepResult& r, const ReportFiles& files) {
    std::printf("%-10s %-24s %-24s %-12s %s\n", "mass", "error", "sbar_sup", "dt_used", "guard");
    for (const auto& p : r.points) {
        if (!p.ok) {
            std::printf("%-10g blow-up: %s\n", p.mass, p.failure.c_str());
            continue;
        }
        std::printf("%-10g %-24.17g %-24.17g %-12g %s\n", p.mass, p.error(), p.sbar_sup, p.dt_used,
                    p.guard.enabled ? (p.guard.certified ? "certified" : "uncertified") : "off");
    }
    for (std::size_t j = 0; j < r.s_prime.size(); ++j) {
        if (j < r.fits.size() && r.fits[j])
            std::printf("s'=%g: rate %.6f, residual %.6f\n", r.s_prime[j], r.fits[j]->rate, r.fits[j]->residual);
        else
            std::printf("s'=%g: too few usable points for a fit\n", r.s_prime[j]);
    }
    std::printf("reference solves: %zu, resumed points: %zu\n", r.nld_solves, r.resumed_points);
    std::printf("wrote %s%s%s\n", files.csv.c_str(), files.plot.empty() ? "" : " and ", files.plot.c_str());
}

int sweep_cmd(const Common& o, bool many_body) {
    const ExperimentConfig c = load(o);
    SweepOptions opt;
    opt.workers = o.workers;
    opt.checkpoint_dir = out_path(o, many_body ? "checkpoints_mb" : "checkpoints");
    opt.resume = o.resume;
    const SweepResult r = many_body ? run_manybody_sweep(c, opt) : run_sweep(c, opt);
    print_sweep(r, emit_report(r, o.out, many_body ? "sweep_mb" : "sweep"));
    return 0;
}

int fit_rate_cmd(const std::string& csv) {
    const auto rows = read_sweep_csv(csv);
    std::vector<double> m, e;
    for (const auto& row : rows) {
        m.push_back(row.mass);
        e.push_back(row.error);
    }
    const RateFit f = fit_rate(m, e);
    std::printf("rate %.6f\nresidual %.6f\npoints %zu\n", f.rate, f.residual, f.points);
    return 0;
}

int check_invariants_cmd(const Common& o, int steps) {
    const ExperimentConfig c = load(o);
    const double mass = first_mass(c, 0.0);
    bool all = true;
    auto line = [&all](const char* name, double value, double limit) {
        const bool ok = value <= limit;
        all = all && ok;
        std::printf("%-32s %.3e  (limit %.0e)  %s\n", name, value, limit, ok ? "ok" : "VIOLATED");
    };

    const DKGSystemState d0 = initial_dkg_state(c, mass);
    DKGSystemState d = d0;
    for (int i = 0; i < steps; ++i) d = dkg_step(std::move(d), c.dt);
    line("dkg relative L2 drift", std::abs(l2_norm(d.psi) - l2_norm(d0.psi)) / l2_norm(d0.psi), 1e-10);
    for (int i = 0; i < steps; ++i) d = dkg_step(std::move(d), -c.dt);
    line("dkg time-reversal return", l2_norm(d.psi - d0.psi) / l2_norm(d0.psi), 1e-10);

    const NLDState n0 = initial_nld_state(c);
    NLDState nl = n0;
    for (int i = 0; i < steps; ++i) nl = nld_step(std::move(nl), c.dt);
    line("nld relative L2 drift", std::abs(l2_norm(nl.psi) - l2_norm(n0.psi)) / l2_norm(n0.psi), 1e-10);
    for (int i = 0; i < steps; ++i) nl = nld_step(std::move(nl), -c.dt);
    line("nld time-reversal return", l2_norm(nl.psi - n0.psi) / l2_norm(n0.psi), 1e-10);

    auto energies = [](const KGState& k) {
        std::vector<std::vector<double>> e{mode_energies(k.s, k.s_dot, k.m_sigma)};
        for (std::size_t mu = 0; mu < 4; ++mu) e.push_back(mode_energies(k.omega[mu], k.omega_dot[mu], k.m_omega));
        return e;
    };
    KGState kg = d0.kg;
    const auto e0 = energies(kg);
    for (int i = 0; i < steps; ++i) kg = kg_homogeneous_step(std::move(kg), c.dt);
    const auto e1 = energies(kg);
    double drift = 0.0;
    for (std::size_t f = 0; f < e0.size(); ++f)
        for (std::size_t i = 0; i < e0[f].size(); ++i) drift = nan_max(drift, std::abs(e1[f][i] - e0[f][i]));
    line("kg mode energy drift", drift, 1e-12);
    return all ? 0 : 1;
}

int split_diagnostic_cmd(const Common& o, double mass_opt) {
    const ExperimentConfig c = load(o);
    const double mass = first_mass(c, mass_opt);
    const auto traj = evolve(initial_dkg_state(c, mass), c.t_forward, c.dt, lab::detail::steps_per_sample(c, c.dt));
    std::vector<SplitSample> history;
    for (const auto& s : traj.samples) history.push_back({s.t, s.psi, to_reduced(s.kg, s.psi, s.c)});
    const auto split = oscillatory_split(history, c.couplings);
    const SobolevIndex sp(c.s_prime);
    std::string text = "t,sbar,s_tilde,s_small\r\n";
    for (std::size_t i = 0; i < split.size(); ++i) {
        const Field& sbar = history[i].reduced.s_bar;
        text += lab::detail::csv_number(split[i].t) + "," + lab::detail::csv_number(sobolev_norm(sbar, sp)) + "," +
                lab::detail::csv_number(sobolev_norm(split[i].s_tilde, sp)) + "," +
                lab::detail::csv_number(sobolev_norm(sbar - split[i].s_tilde, sp)) + "\r\n";
    }
    const auto path = out_path(o, "split.csv");
    lab::detail::write_text(path, text);
    std::printf("mass %g, %zu samples, wrote %s\n", mass, split.size(), path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dkglab: coupled Dirac/Klein-Gordon experiments"};
    app.require_subcommand(1);
    Common o;
    auto add_common = [&o](CLI::App* sub, bool sweep) {
        sub->add_option("--config", o.config_path, "configuration file (key = value)");
        sub->add_option("--out", o.out, "output directory");
        if (sweep) {
            sub->add_option("--workers", o.workers, "parallel sweep workers")->check(CLI::PositiveNumber);
            sub->add_flag("--resume", o.resume, "reuse finished sweep points from checkpoints");
        }
    };

    double mass = 0.0;
    int steps = 10000;
    std::string csv;

    auto* evolve_dkg = app.add_subcommand("evolve-dkg", "evolve the coupled system at one mass");
    add_common(evolve_dkg, false);
    evolve_dkg->add_option("--mass", mass, "meson mass (default: first sweep mass)");
    auto* evolve_nld = app.add_subcommand("evolve-nld", "evolve the cubic Dirac equation");
    add_common(evolve_nld, false);
    auto* sweep = app.add_subcommand("sweep-mass", "one-body mass sweep");
    add_common(sweep, true);
    auto* sweep_mb = app.add_subcommand("sweep-mass-mb", "many-body mass sweep");
    add_common(sweep_mb, true);
    auto* fit = app.add_subcommand("fit-rate", "fit a power law to a sweep CSV");
    fit->add_option("csv", csv, "CSV with columns mass,error,sbar_sup,dt_used")->required();
    auto* invariants = app.add_subcommand("check-invariants", "conservation and reversibility checks");
    add_common(invariants, false);
    invariants->add_option("--steps", steps, "number of steps")->check(CLI::PositiveNumber);
    auto* split = app.add_subcommand("split-diagnostic", "oscillatory/small split of the reduced field");
    add_common(split, false);
    split->add_option("--mass", mass, "meson mass (default: first sweep mass)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*evolve_dkg) return evolve_dkg_cmd(o, mass);
        if (*evolve_nld) return evolve_nld_cmd(o);
        if (*sweep) return sweep_cmd(o, false);
        if (*sweep_mb) return sweep_cmd(o, true);
        if (*fit) return fit_rate_cmd(csv);
        if (*invariants) return check_invariants_cmd(o, steps);
        if (*split) return split_diagnostic_cmd(o, mass);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const NonFiniteError& e) {
        std::cerr << "blow-up: " << e.what() << "\n";
        return exit_blowup;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
