#include "dkg/lab/report.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sys/wait.h>

using namespace dkg;
using namespace dkg::lab;

namespace {

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("dkglab_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.points = 64;
    c.length = 16.0;
    c.masses = {4, 8, 16};
    c.t_forward = 0.25;
    c.dt = 1.0 / 64;
    c.sample_interval = 1.0 / 16;
    c.guard_max_halvings = 2;
    c.rank = 2;
    return c;
}

SpinorField random_spinor(const TorusGrid& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> d;
    SpinorField psi(g);
    for (int c = 0; c < 4; ++c)
        for (std::size_t i = 0; i < g.size(); ++i) psi[c][i] = complex(d(rng), d(rng));
    return psi;
}

Field random_field(const TorusGrid& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> d;
    Field f(g);
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = complex(d(rng), 0.0);
    return f;
}

DKGSystemState random_dkg_state(const TorusGrid& g) {
    KGState kg(g, 7.5, 11.25);
    kg.s = random_field(g, 1);
    kg.s_dot = random_field(g, 2);
    for (unsigned mu = 0; mu < 4; ++mu) {
        kg.omega[mu] = random_field(g, 3 + mu);
        kg.omega_dot[mu] = random_field(g, 7 + mu);
    }
    return DKGSystemState{random_spinor(g, 42), kg, Couplings{0.3, 0.7, 1.1}, 0.123456789};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void spit(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << s;
}

SnapshotError::Kind load_error_kind(const std::string& path) {
    try {
        (void)snapshot_load<DKGSystemState>(path);
    } catch (const SnapshotError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected a snapshot error";
    return SnapshotError::Kind::io;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DKGLAB_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, DefaultsAreValid) {
    const ExperimentConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.masses, (std::vector<double>{4, 8, 16, 32, 64}));
    EXPECT_DOUBLE_EQ(c.interval(), 2.0 / 64);
}

TEST(Config, ParsesKeysFractionsAndComments) {
    const auto c = parse_config_string(
        "# a comment\n"
        "grid.points = 256\n"
        "\n"
        "time.dt = 1/512\n"
        "sweep.masses = 2, 4, 8\n"
        "initial.fields = mismatched\n"
        "initial.preset = rough\n"
        "sweep.extra_s_prime = 2.6, 2.75\n"
        "guard.enabled = false\n");
    EXPECT_EQ(c.points, 256);
    EXPECT_DOUBLE_EQ(c.dt, 1.0 / 512);
    EXPECT_EQ(c.masses, (std::vector<double>{2, 4, 8}));
    EXPECT_EQ(c.field_init, FieldInit::mismatched);
    EXPECT_EQ(c.preset, Preset::rough);
    EXPECT_EQ(c.all_s_prime(), (std::vector<double>{1.0, 2.6, 2.75}));
    EXPECT_FALSE(c.guard_enabled);
}

TEST(Config, TextRoundTrip) {
    ExperimentConfig c = small_config();
    c.extra_s_prime = {2.6};
    c.occupations = {1.0, 0.5};
    c.dt = 1.0 / 3.0 / 64.0;
    c.sample_interval = c.dt * 4;
    c.t_forward = c.sample_interval * 8;
    const auto back = parse_config_string(to_text(c));
    EXPECT_EQ(to_text(back), to_text(c));
    EXPECT_EQ(back.dt, c.dt);
}

TEST(Config, RejectsUnknownKeyWithLineNumber) {
    try {
        (void)parse_config_string("grid.points = 64\nsweep.bogus = 1\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("sweep.bogus"), std::string::npos);
    }
}

TEST(Config, RejectsInvalidValues) {
    EXPECT_THROW(parse_config_string("grid.points = abc\n"), ConfigError);
    EXPECT_THROW(parse_config_string("grid.points = 64 x\n"), ConfigError);
    EXPECT_THROW(parse_config_string("no equals sign\n"), ConfigError);
    EXPECT_THROW(parse_config_string("sweep.s = 2.5\n"), ConfigError);
    EXPECT_THROW(parse_config_string("sweep.s_prime = 3.5\n"), ConfigError);
    EXPECT_THROW(parse_config_string("sweep.masses = 4, 4, 8\n"), ConfigError);
    EXPECT_THROW(parse_config_string("sweep.masses = 0.5, 4\n"), ConfigError);
    EXPECT_THROW(parse_config_string("time.dt = 0\n"), ConfigError);
    EXPECT_THROW(parse_config_string("time.dt = 1/0\n"), ConfigError);
    EXPECT_THROW(parse_config_string("time.sample_interval = 0.01\n"), ConfigError);
    EXPECT_THROW(parse_config_string("initial.fields = sometimes\n"), ConfigError);
    EXPECT_THROW(parse_config_string("manybody.rank = 2\nmanybody.occupations = 1\n"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/dkglab.cfg"), ConfigError);
}

TEST(InitialData, SharedSpinorAcrossMasses) {
    const ExperimentConfig c = small_config();
    const auto a = initial_dkg_state(c, 4.0);
    const auto b = initial_dkg_state(c, 64.0);
    EXPECT_TRUE(a.psi == b.psi);
    EXPECT_NEAR(l2_norm(a.psi), 1.0, 1e-14);
}

TEST(InitialData, ConsistentFieldsHaveZeroReducedScalar) {
    const ExperimentConfig c = small_config();
    const auto s = initial_dkg_state(c, 8.0);
    const ReducedState r = to_reduced(s.kg, s.psi, s.c);
    EXPECT_LT(max_abs(r.s_bar), 1e-15);
    EXPECT_LT(max_abs(r.s_bar_dot), 1e-13);
}

TEST(InitialData, OrbitalsOrthonormal) {
    ExperimentConfig c = small_config();
    c.rank = 3;
    const auto orb = initial_orbitals(c);
    for (std::size_t j = 0; j < orb.size(); ++j)
        for (std::size_t k = 0; k < orb.size(); ++k)
            EXPECT_NEAR(std::abs(l2_inner(orb[j], orb[k]) - (j == k ? 1.0 : 0.0)), 0.0, 1e-13);
}

TEST(FitRate, ExactPowerLaws) {
    const std::vector<double> m{4, 8, 16, 32, 64};
    for (double r : {1.0, 0.25, 2.0}) {
        std::vector<double> e;
        for (double x : m) e.push_back(3.7 * std::pow(x, -r));
        const RateFit f = fit_rate(m, e);
        EXPECT_NEAR(f.rate, r, 1e-12);
        EXPECT_NEAR(f.residual, 0.0, 1e-12);
        EXPECT_NEAR(f.predict(10.0), 3.7 * std::pow(10.0, -r), 1e-12);
    }
}

TEST(FitRate, ResidualIsRmsOfLogResiduals) {
    const std::vector<double> m{1, 10, 100};
    const std::vector<double> e{1.0, 0.1 * std::pow(10.0, 0.3), 0.01};
    const RateFit f = fit_rate(m, e);
    // log10 residuals about the fitted line: (-0.1, 0.2, -0.1)
    EXPECT_NEAR(f.rate, 1.0, 1e-12);
    EXPECT_NEAR(f.residual, std::sqrt((0.01 + 0.04 + 0.01) / 3.0), 1e-12);
}

TEST(FitRate, RejectsBadInput) {
    EXPECT_THROW(fit_rate(std::vector<double>{1, 2}, std::vector<double>{1, 1}), std::invalid_argument);
    EXPECT_THROW(fit_rate(std::vector<double>{1, 2, 4}, std::vector<double>{1, 0, 1}), std::domain_error);
    EXPECT_THROW(fit_rate(std::vector<double>{1, 2, 4}, std::vector<double>{1, -1, 1}), std::domain_error);
    EXPECT_THROW(fit_rate(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}), std::domain_error);
}

TEST(Snapshot, DKGRoundTripBitExact) {
    const auto dir = scratch("snap_dkg");
    const TorusGrid g(1, 64, 10.0);
    const auto s = random_dkg_state(g);
    const auto path = (dir / "s.snap").string();
    snapshot_save(s, path);
    const auto back = snapshot_load<DKGSystemState>(path);
    EXPECT_TRUE(back.psi == s.psi);
    EXPECT_TRUE(back.kg == s.kg);
    EXPECT_EQ(back.t, s.t);
    EXPECT_EQ(back.c.gamma_sigma, s.c.gamma_sigma);
    EXPECT_EQ(back.c.gamma_omega, s.c.gamma_omega);
    EXPECT_EQ(back.c.fermion_mass, s.c.fermion_mass);
    EXPECT_EQ(back.kg.m_omega, 11.25);
}

TEST(Snapshot, NLDAndManyBodyRoundTrip) {
    const auto dir = scratch("snap_other");
    const TorusGrid g(2, 8, 4.0);
    const NLDState n{random_spinor(g, 5), Couplings{}, -0.5};
    snapshot_save(n, (dir / "n.snap").string());
    const auto nb = snapshot_load<NLDState>((dir / "n.snap").string());
    EXPECT_TRUE(nb.psi == n.psi);
    EXPECT_EQ(nb.psi.grid().dim(), 2);

    const auto d = random_dkg_state(g);
    ManyBodyDKGState mb{DensityMatrix({random_spinor(g, 8), random_spinor(g, 9)}, {1.0, 0.25}), d.kg, d.c, 2.0};
    snapshot_save(mb, (dir / "mb.snap").string());
    const auto mbb = snapshot_load<ManyBodyDKGState>((dir / "mb.snap").string());
    ASSERT_EQ(mbb.gamma.rank(), 2u);
    EXPECT_TRUE(mbb.gamma.orbitals[1] == mb.gamma.orbitals[1]);
    EXPECT_EQ(mbb.gamma.occupations, mb.gamma.occupations);
    EXPECT_TRUE(mbb.kg == mb.kg);

    ManyBodyNLDState mn{mb.gamma, d.c, 1.0};
    snapshot_save(mn, (dir / "mn.snap").string());
    EXPECT_TRUE(snapshot_load<ManyBodyNLDState>((dir / "mn.snap").string()).gamma.orbitals[0] == mn.gamma.orbitals[0]);
}

TEST(Snapshot, HeaderLayout) {
    const auto bytes = encode_snapshot(to_snapshot(NLDState{random_spinor(TorusGrid(1, 8, 2.0), 1), Couplings{}, 0.0}));
    ASSERT_GT(bytes.size(), 64u);
    EXPECT_EQ(bytes.substr(0, 8), std::string("DKGSNAP\0", 8));
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), snapshot_version);
    EXPECT_EQ(bytes[64], '{');
    const auto meta = nlohmann::json::parse(bytes.substr(64, bytes.find('\n', 64) - 64));
    EXPECT_EQ(meta["kind"], "nld");
    EXPECT_EQ(meta["arrays"][0]["name"], "psi");
    EXPECT_EQ(meta["arrays"][0]["count"], 64);
    EXPECT_EQ(bytes.size(), bytes.find('\n', 64) + 1 + 64 * 8 + 8);
}

TEST(Snapshot, TruncatedFileIsChecksumError) {
    const auto dir = scratch("snap_trunc");
    const auto path = (dir / "s.snap").string();
    snapshot_save(random_dkg_state(TorusGrid(1, 32, 8.0)), path);
    const std::string bytes = slurp(path);
    spit(path, bytes.substr(0, bytes.size() - 100));
    EXPECT_EQ(load_error_kind(path), SnapshotError::Kind::checksum);
    spit(path, bytes.substr(0, 20));
    EXPECT_EQ(load_error_kind(path), SnapshotError::Kind::checksum);
}

TEST(Snapshot, FlippedPayloadBitIsChecksumError) {
    const auto dir = scratch("snap_flip");
    const auto path = (dir / "s.snap").string();
    snapshot_save(random_dkg_state(TorusGrid(1, 32, 8.0)), path);
    std::string bytes = slurp(path);
    bytes[bytes.size() - 50] ^= 0x01;
    spit(path, bytes);
    EXPECT_EQ(load_error_kind(path), SnapshotError::Kind::checksum);
}

TEST(Snapshot, BadMagicIsMalformedHeader) {
    const auto dir = scratch("snap_magic");
    const auto path = (dir / "s.snap").string();
    snapshot_save(random_dkg_state(TorusGrid(1, 32, 8.0)), path);
    std::string bytes = slurp(path);
    bytes[0] = 'X';
    spit(path, bytes);
    EXPECT_EQ(load_error_kind(path), SnapshotError::Kind::malformed_header);
    spit(path, "hello");
    EXPECT_EQ(load_error_kind(path), SnapshotError::Kind::malformed_header);
}

TEST(Snapshot, ArrayGridDisagreementIsDimensionMismatch) {
    const auto dir = scratch("snap_dim");
    const auto path = (dir / "s.snap").string();
    Snapshot s = to_snapshot(random_dkg_state(TorusGrid(1, 32, 8.0)));
    s.meta["grid"]["points"] = 64;
    write_snapshot(s, path);
    EXPECT_EQ(load_error_kind(path), SnapshotError::Kind::dimension_mismatch);
}

TEST(Snapshot, WrongStateKindRejected) {
    const auto dir = scratch("snap_kind");
    const auto path = (dir / "s.snap").string();
    snapshot_save(NLDState{random_spinor(TorusGrid(1, 8, 2.0), 1), Couplings{}, 0.0}, path);
    EXPECT_THROW(snapshot_load<DKGSystemState>(path), SnapshotError);
    EXPECT_THROW(snapshot_load<NLDState>((dir / "missing.snap").string()), SnapshotError);
}

TEST(Report, FourMassSweepGivesFourRows) {
    SweepResult r;
    r.s_prime = {1.0};
    for (double m : {4.0, 8.0, 16.0, 32.0}) {
        SweepPoint p;
        p.mass = m;
        p.ok = true;
        p.errors = {0.1 / m + 1e-17 * m};
        p.sbar_sup = 1.0 / 3.0 / m;
        p.dt_used = 1.0 / 512;
        r.points.push_back(p);
    }
    lab::detail::fit_points(r);
    const auto dir = scratch("report4");
    const auto files = emit_report(r, dir.string());
    const std::string csv = slurp(files.csv);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
    EXPECT_EQ(csv.substr(0, csv.find('\r')), "mass,error,sbar_sup,dt_used");
    ASSERT_FALSE(files.plot.empty());
    EXPECT_NE(slurp(files.plot).find("<svg"), std::string::npos);

    const auto rows = read_sweep_csv(files.csv);
    ASSERT_EQ(rows.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(rows[i].mass, r.points[i].mass);
        EXPECT_EQ(rows[i].error, r.points[i].error());
        EXPECT_EQ(rows[i].sbar_sup, r.points[i].sbar_sup);
        EXPECT_EQ(rows[i].dt_used, r.points[i].dt_used);
    }
    const auto fit = nlohmann::json::parse(slurp(files.fit_json));
    EXPECT_NEAR(fit["fits"][0]["rate"].get<double>(), 1.0, 1e-6);
}

TEST(Report, EmptySweepHeaderOnlyNoPlot) {
    SweepResult r;
    r.s_prime = {1.0};
    const auto dir = scratch("report0");
    const auto files = emit_report(r, dir.string());
    EXPECT_EQ(slurp(files.csv), "mass,error,sbar_sup,dt_used\r\n");
    EXPECT_TRUE(files.plot.empty());
    EXPECT_FALSE(std::filesystem::exists(dir / "sweep.svg"));
    EXPECT_TRUE(read_sweep_csv(files.csv).empty());
}

TEST(Report, NonFiniteValuesSurviveReread) {
    SweepResult r;
    r.s_prime = {1.0};
    SweepPoint p;
    p.mass = 4.0;
    p.errors = {std::numeric_limits<double>::quiet_NaN()};
    r.points.push_back(p);
    const auto rows = parse_sweep_csv(sweep_csv(r));
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_TRUE(std::isnan(rows[0].error));
}

TEST(Sweep, ErrorsDecreaseWithMass) {
    const auto r = run_sweep(small_config());
    ASSERT_EQ(r.points.size(), 3u);
    for (const auto& p : r.points) {
        EXPECT_TRUE(p.ok);
        EXPECT_GT(p.error(), 0.0);
        EXPECT_GE(p.dt_used, 0.0);
        EXPECT_FALSE(p.guard.dts.empty());
    }
    EXPECT_GT(r.points[0].error(), r.points[1].error());
    EXPECT_GT(r.points[1].error(), r.points[2].error());
    ASSERT_TRUE(r.fit().has_value());
}

TEST(Sweep, GuardRecordsHalvings) {
    ExperimentConfig c = small_config();
    c.guard_tolerance = 1e-12;
    c.masses = {4, 8, 16};
    const auto r = run_sweep(c);
    for (const auto& p : r.points) {
        EXPECT_FALSE(p.guard.certified);
        EXPECT_EQ(p.guard.dts.size(), 3u);
        EXPECT_EQ(p.dt_used, c.dt / 4);
    }
    c.guard_enabled = false;
    const auto off = run_sweep(c);
    for (const auto& p : off.points) {
        EXPECT_EQ(p.guard.dts.size(), 1u);
        EXPECT_EQ(p.dt_used, c.dt);
    }
}

TEST(Sweep, ZeroCouplingGivesZeroErrors) {
    ExperimentConfig c = small_config();
    c.couplings.gamma_sigma = 0.0;
    c.couplings.gamma_omega = 0.0;
    c.field_init = FieldInit::mismatched;
    c.guard_enabled = false;
    const auto r = run_sweep(c);
    for (const auto& p : r.points) EXPECT_LT(p.error(), 1e-13);
}

TEST(Sweep, ReferenceSolvedOncePerStepAndDirection) {
    ExperimentConfig c = small_config();
    c.guard_enabled = false;
    c.t_backward = 0.125;
    const auto r = run_sweep(c, {3, "", false});
    EXPECT_EQ(r.nld_solves, 2u);
}

TEST(Sweep, DeterministicAndParallelMatchesSerial) {
    ExperimentConfig c = small_config();
    c.t_backward = 0.125;
    c.extra_s_prime = {2.6};
    const auto a = run_sweep(c, {1, "", false});
    const auto b = run_sweep(c, {3, "", false});
    const auto a2 = run_sweep(c, {1, "", false});
    EXPECT_EQ(sweep_csv(a), sweep_csv(b));
    EXPECT_EQ(sweep_detail_csv(a), sweep_detail_csv(b));
    EXPECT_EQ(sweep_detail_csv(a), sweep_detail_csv(a2));
}

TEST(Sweep, ResumedSweepEqualsUninterrupted) {
    const ExperimentConfig c = small_config();
    const auto full = run_sweep(c);

    const auto dir = scratch("resume");
    (void)run_sweep(c, {1, dir.string(), false});
    std::filesystem::remove(dir / "point_1.snap");
    const auto resumed = run_sweep(c, {2, dir.string(), true});
    EXPECT_EQ(resumed.resumed_points, 2u);
    EXPECT_EQ(sweep_detail_csv(resumed), sweep_detail_csv(full));
    EXPECT_EQ(sweep_csv(resumed), sweep_csv(full));
}

TEST(Sweep, ResumeIgnoresCheckpointsFromOtherConfig) {
    ExperimentConfig c = small_config();
    const auto dir = scratch("resume_other");
    (void)run_sweep(c, {1, dir.string(), false});
    c.couplings.gamma_sigma = 0.4;
    const auto r = run_sweep(c, {1, dir.string(), true});
    EXPECT_EQ(r.resumed_points, 0u);
}

TEST(Sweep, MismatchedInitKeepsReducedFieldAlive) {
    ExperimentConfig c = small_config();
    c.field_init = FieldInit::mismatched;
    const auto r = run_sweep(c);
    for (const auto& p : r.points) {
        EXPECT_GT(p.sbar_in_l2, 0.0);
        EXPECT_GE(p.sbar_sup_l2, 0.25 * p.sbar_in_l2);
    }
    EXPECT_GT(r.points[0].error(), r.points[2].error());
}

TEST(Sweep, BlowUpRecordedPerPoint) {
    ExperimentConfig c = small_config();
    c.couplings.gamma_sigma = 1e14;
    c.guard_enabled = false;
    const auto r = run_sweep(c);
    ASSERT_EQ(r.points.size(), 3u);
    for (const auto& p : r.points) {
        EXPECT_FALSE(p.ok);
        EXPECT_FALSE(p.failure.empty());
        EXPECT_TRUE(std::isnan(p.error()));
    }
    EXPECT_FALSE(r.fit().has_value());
}

TEST(Sweep, ManyBodyErrorsDecrease) {
    ExperimentConfig c = small_config();
    c.guard_enabled = false;
    const auto r = run_manybody_sweep(c);
    EXPECT_GT(r.points[0].error(), r.points[1].error());
    EXPECT_GT(r.points[1].error(), r.points[2].error());
    for (const auto& p : r.points) EXPECT_LT(p.gram_drift, 1e-10);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("cli");
    spit(dir / "bad.cfg", "grid.points = 64\nnot.a.key = 1\n");
    EXPECT_EQ(run_cli("sweep-mass --config " + (dir / "bad.cfg").string() + " --out " + dir.string()), 2);

    spit(dir / "blow.cfg",
         "grid.points = 32\ngrid.length = 8\ncouplings.gamma_sigma = 1e14\ntime.t_forward = 0.25\n"
         "time.dt = 1/64\ntime.sample_interval = 1/16\n");
    EXPECT_EQ(run_cli("evolve-dkg --config " + (dir / "blow.cfg").string() + " --out " + dir.string()), 3);

    spit(dir / "sweep.csv", "mass,error,sbar_sup,dt_used\r\n4,0.25,0,0.01\r\n8,0.125,0,0.01\r\n16,0.0625,0,0.01\r\n");
    EXPECT_EQ(run_cli("fit-rate " + (dir / "sweep.csv").string()), 0);

    spit(dir / "ok.cfg",
         "grid.points = 32\ngrid.length = 8\nsweep.masses = 4, 8, 16\ntime.t_forward = 0.25\n"
         "time.dt = 1/64\ntime.sample_interval = 1/16\nmanybody.rank = 2\n");
    EXPECT_EQ(run_cli("sweep-mass --config " + (dir / "ok.cfg").string() + " --out " + dir.string() + " --workers 2"), 0);
    EXPECT_EQ(read_sweep_csv((dir / "sweep.csv").string()).size(), 3u);
    EXPECT_TRUE(std::filesystem::exists(dir / "sweep.svg"));
    EXPECT_EQ(run_cli("sweep-mass --config " + (dir / "ok.cfg").string() + " --out " + dir.string() + " --resume"), 0);
    EXPECT_EQ(run_cli("sweep-mass-mb --config " + (dir / "ok.cfg").string() + " --out " + dir.string()), 0);
    EXPECT_EQ(run_cli("evolve-nld --config " + (dir / "ok.cfg").string() + " --out " + dir.string()), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "nld_final.snap"));
    EXPECT_EQ(run_cli("split-diagnostic --config " + (dir / "ok.cfg").string() + " --out " + dir.string()), 0);
    EXPECT_EQ(run_cli("check-invariants --steps 50 --config " + (dir / "ok.cfg").string() + " --out " + dir.string()), 0);
}
