#pragma once

// Mass sweeps m_sigma = m_omega = m over a list of masses, measuring the
// distance between the coupled flow and the cubic Dirac reference.

#include "dkg/lab/fit.hpp"
#include "dkg/lab/initial_data.hpp"
#include "dkg/lab/snapshot.hpp"

#include <atomic>
#include <filesystem>
#include <future>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

namespace dkg::lab {

struct GuardRecord {
    bool enabled = false;
    bool certified = false;  ///< the last halving changed the primary error by at most the tolerance
    std::vector<double> dts;
    std::vector<double> errors;  ///< primary error at each dt in `dts`
};

struct SweepPoint {
    double mass = 0.0;
    bool ok = false;
    std::string failure;
    std::vector<double> errors;  ///< sup-in-time error at each measurement exponent
    double sbar_sup = 0.0;       ///< sup_t ||Sbar||_{H^{s'}}, primary s'
    double sbar_sup_l2 = 0.0;    ///< sup_t ||Sbar||_{L^2}
    double sbar_in_l2 = 0.0;     ///< ||Sbar(0)||_{L^2}
    double dt_used = 0.0;
    double gram_drift = 0.0;     ///< many-body only: max |G(t) - G(0)| over the coupled samples
    GuardRecord guard;

    double error() const { return errors.empty() ? std::numeric_limits<double>::quiet_NaN() : errors.front(); }
};

struct SweepResult {
    bool many_body = false;
    std::vector<double> s_prime;
    std::vector<SweepPoint> points;
    std::vector<std::optional<RateFit>> fits;  ///< one per exponent; empty when fewer than 3 usable points
    std::size_t nld_solves = 0;
    std::size_t resumed_points = 0;

    std::vector<double> masses() const {
        std::vector<double> m;
        for (const auto& p : points) m.push_back(p.mass);
        return m;
    }
    std::optional<RateFit> fit() const { return fits.empty() ? std::nullopt : fits.front(); }
};

struct SweepOptions {
    int workers = 1;
    std::string checkpoint_dir;  ///< empty disables checkpoints
    bool resume = false;
};

namespace detail {

struct OneBody {
    using DKG = DKGSystemState;
    using NLD = NLDState;
    static constexpr const char* name = "one-body";
    static DKG initial_dkg(const ExperimentConfig& c, double m) { return initial_dkg_state(c, m); }
    static NLD initial_nld(const ExperimentConfig& c) { return initial_nld_state(c); }
    static double error(const std::vector<DKG>& a, const std::vector<NLD>& b, double s) {
        return error_metric(a, b, SobolevIndex(s));
    }
};

struct ManyBody {
    using DKG = ManyBodyDKGState;
    using NLD = ManyBodyNLDState;
    static constexpr const char* name = "many-body";
    static DKG initial_dkg(const ExperimentConfig& c, double m) { return initial_manybody_dkg_state(c, m); }
    static NLD initial_nld(const ExperimentConfig& c) { return initial_manybody_nld_state(c); }
    static double error(const std::vector<DKG>& a, const std::vector<NLD>& b, double s) {
        return hs_error_metric(a, b, OperatorSobolevIndex(s));
    }
};

inline const KGState& kg_of(const DKGSystemState& s) { return s.kg; }
inline const KGState& kg_of(const ManyBodyDKGState& s) { return s.kg; }

inline Field reduced_scalar(const KGState& kg, std::span<const SpinorField> orbitals, std::span<const double> weights,
                            const Couplings& c) {
    return kg.s + complex(c.gamma_sigma, 0.0) * densities(orbitals, weights).rho_s;
}

inline double gram_drift(std::span<const SpinorField> now, std::span<const SpinorField> start) {
    double worst = 0.0;
    for (std::size_t j = 0; j < now.size(); ++j)
        for (std::size_t k = 0; k < now.size(); ++k)
            worst = nan_max(worst, std::abs(l2_inner(now[j], now[k]) - l2_inner(start[j], start[k])));
    return worst;
}

inline std::size_t steps_per_sample(const ExperimentConfig& c, double dt) { return step_count(c.interval(), dt); }

/// NLD reference samples keyed by (dt, signed horizon); each is solved exactly once.
template <typename Kind>
class ReferenceCache {
public:
    using Samples = std::vector<typename Kind::NLD>;
    using Handle = std::shared_ptr<const Samples>;

    explicit ReferenceCache(const ExperimentConfig& c) : config_(c) {}

    Handle get(double dt, double horizon) {
        std::promise<Handle> promise;
        std::shared_future<Handle> fut;
        bool owner = false;
        {
            std::lock_guard lock(mutex_);
            const auto key = std::make_pair(dt, horizon);
            if (auto it = cache_.find(key); it != cache_.end()) {
                fut = it->second;
            } else {
                fut = promise.get_future().share();
                cache_.emplace(key, fut);
                ++solves_;
                owner = true;
            }
        }
        if (owner) {
            try {
                const double step = horizon < 0.0 ? -dt : dt;
                auto traj = evolve(Kind::initial_nld(config_), horizon, step, steps_per_sample(config_, dt));
                promise.set_value(std::make_shared<const Samples>(std::move(traj.samples)));
            } catch (...) {
                promise.set_exception(std::current_exception());
            }
        }
        return fut.get();
    }

    std::size_t solves() const {
        std::lock_guard lock(mutex_);
        return solves_;
    }

private:
    ExperimentConfig config_;
    mutable std::mutex mutex_;
    std::map<std::pair<double, double>, std::shared_future<Handle>> cache_;
    std::size_t solves_ = 0;
};

struct RunMeasure {
    std::vector<double> errors;
    double sbar_sup = 0.0;
    double sbar_sup_l2 = 0.0;
    double gram_drift = 0.0;
};

template <typename Kind>
RunMeasure measure_run(const ExperimentConfig& c, double mass, double dt, ReferenceCache<Kind>& refs) {
    const auto s_primes = c.all_s_prime();
    RunMeasure out;
    out.errors.assign(s_primes.size(), 0.0);
    const typename Kind::DKG start = Kind::initial_dkg(c, mass);

    for (const double horizon : {c.t_forward, -c.t_backward}) {
        if (horizon == 0.0) continue;
        const double step = horizon < 0.0 ? -dt : dt;
        auto traj = evolve(start, horizon, step, steps_per_sample(c, dt));
        const auto ref = refs.get(dt, horizon);
        for (std::size_t j = 0; j < s_primes.size(); ++j)
            out.errors[j] = nan_max(out.errors[j], Kind::error(traj.samples, *ref, s_primes[j]));
        for (const auto& smp : traj.samples) {
            const Field sbar = reduced_scalar(kg_of(smp), orbitals_of(smp), weights_of(smp), c.couplings);
            out.sbar_sup = nan_max(out.sbar_sup, sobolev_norm(sbar, SobolevIndex(c.s_prime)));
            out.sbar_sup_l2 = nan_max(out.sbar_sup_l2, sobolev_norm(sbar, SobolevIndex(0.0)));
            out.gram_drift = nan_max(out.gram_drift, gram_drift(orbitals_of(smp), orbitals_of(start)));
        }
    }
    return out;
}

template <typename Kind>
SweepPoint compute_point(const ExperimentConfig& c, double mass, ReferenceCache<Kind>& refs) {
    SweepPoint p;
    p.mass = mass;
    p.guard.enabled = c.guard_enabled;
    try {
        const typename Kind::DKG start = Kind::initial_dkg(c, mass);
        p.sbar_in_l2 = sobolev_norm(reduced_scalar(kg_of(start), orbitals_of(start), weights_of(start), c.couplings),
                                    SobolevIndex(0.0));

        double dt = c.dt;
        RunMeasure m = measure_run(c, mass, dt, refs);
        p.guard.dts.push_back(dt);
        p.guard.errors.push_back(m.errors.front());
        if (c.guard_enabled) {
            for (int h = 0; h < c.guard_max_halvings; ++h) {
                dt *= 0.5;
                RunMeasure finer = measure_run(c, mass, dt, refs);
                const double prev = m.errors.front(), now = finer.errors.front();
                p.guard.dts.push_back(dt);
                p.guard.errors.push_back(now);
                m = std::move(finer);
                if (std::abs(now - prev) <= c.guard_tolerance * std::abs(now)) {
                    p.guard.certified = true;
                    break;
                }
            }
        }
        p.dt_used = dt;
        p.errors = std::move(m.errors);
        p.sbar_sup = m.sbar_sup;
        p.sbar_sup_l2 = m.sbar_sup_l2;
        p.gram_drift = m.gram_drift;
        p.ok = true;
    } catch (const NonFiniteError& e) {
        p.ok = false;
        p.failure = e.what();
        p.errors.assign(c.all_s_prime().size(), std::numeric_limits<double>::quiet_NaN());
    }
    return p;
}

inline std::string config_fingerprint(const ExperimentConfig& c, const std::string& kind) {
    const std::string text = std::string(kind) + "\n" + to_text(c);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(text.data(), text.size())));
    return buf;
}

inline std::string checkpoint_path(const std::string& dir, std::size_t index) {
    return (std::filesystem::path(dir) / ("point_" + std::to_string(index) + ".snap")).string();
}

inline Snapshot point_snapshot(const SweepPoint& p, const std::string& fingerprint) {
    Snapshot s;
    s.meta["kind"] = "sweep-point";
    s.meta["fingerprint"] = fingerprint;
    s.meta["ok"] = p.ok;
    s.meta["failure"] = p.failure;
    s.meta["guard"] = {{"enabled", p.guard.enabled}, {"certified", p.guard.certified}};
    s.arrays.emplace_back("scalars", std::vector<double>{p.mass, p.sbar_sup, p.sbar_sup_l2, p.sbar_in_l2, p.dt_used,
                                                          p.gram_drift});
    s.arrays.emplace_back("errors", p.errors);
    s.arrays.emplace_back("guard.dts", p.guard.dts);
    s.arrays.emplace_back("guard.errors", p.guard.errors);
    return s;
}

inline std::optional<SweepPoint> point_from_snapshot(const Snapshot& s, const std::string& fingerprint,
                                                     double mass) {
    if (s.meta.value("kind", "") != "sweep-point" || s.meta.value("fingerprint", "") != fingerprint) return std::nullopt;
    const auto& sc = s.array("scalars");
    if (sc.size() != 6 || sc[0] != mass) return std::nullopt;
    SweepPoint p;
    p.mass = sc[0];
    p.sbar_sup = sc[1];
    p.sbar_sup_l2 = sc[2];
    p.sbar_in_l2 = sc[3];
    p.dt_used = sc[4];
    p.gram_drift = sc[5];
    p.ok = s.meta.at("ok").get<bool>();
    p.failure = s.meta.at("failure").get<std::string>();
    p.guard.enabled = s.meta.at("guard").at("enabled").get<bool>();
    p.guard.certified = s.meta.at("guard").at("certified").get<bool>();
    p.errors = s.array("errors");
    p.guard.dts = s.array("guard.dts");
    p.guard.errors = s.array("guard.errors");
    return p;
}

inline void fit_points(SweepResult& r) {
    r.fits.assign(r.s_prime.size(), std::nullopt);
    for (std::size_t j = 0; j < r.s_prime.size(); ++j) {
        std::vector<double> m, e;
        for (const auto& p : r.points)
            if (p.ok && p.errors[j] > 0.0 && std::isfinite(p.errors[j])) {
                m.push_back(p.mass);
                e.push_back(p.errors[j]);
            }
        if (m.size() >= 3) r.fits[j] = fit_rate(m, e);
    }
}

template <typename Kind>
SweepResult run_sweep_impl(const ExperimentConfig& c, const SweepOptions& opt) {
    c.validate();
    SweepResult result;
    result.many_body = std::is_same_v<Kind, ManyBody>;
    result.s_prime = c.all_s_prime();
    result.points.resize(c.masses.size());

    const std::string fingerprint = config_fingerprint(c, Kind::name);
    if (!opt.checkpoint_dir.empty()) std::filesystem::create_directories(opt.checkpoint_dir);

    std::vector<char> done(c.masses.size(), 0);
    if (opt.resume && !opt.checkpoint_dir.empty()) {
        for (std::size_t i = 0; i < c.masses.size(); ++i) {
            const auto path = checkpoint_path(opt.checkpoint_dir, i);
            if (!std::filesystem::exists(path)) continue;
            try {
                if (auto p = point_from_snapshot(read_snapshot(path), fingerprint, c.masses[i])) {
                    result.points[i] = std::move(*p);
                    done[i] = 1;
                    ++result.resumed_points;
                }
            } catch (const SnapshotError&) {
                // unreadable checkpoints are recomputed
            }
        }
    }

    ReferenceCache<Kind> refs(c);
    std::atomic<std::size_t> next{0};
    std::mutex io_mutex;
    std::exception_ptr failure;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= c.masses.size()) return;
            if (done[i]) continue;
            try {
                SweepPoint p = compute_point<Kind>(c, c.masses[i], refs);
                if (!opt.checkpoint_dir.empty()) {
                    std::lock_guard lock(io_mutex);
                    write_snapshot(point_snapshot(p, fingerprint), checkpoint_path(opt.checkpoint_dir, i));
                }
                result.points[i] = std::move(p);
            } catch (...) {
                std::lock_guard lock(io_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };

    const int workers = std::max(1, std::min<int>(opt.workers, static_cast<int>(c.masses.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    result.nld_solves = refs.solves();
    fit_points(result);
    return result;
}

}  // namespace detail

inline SweepResult run_sweep(const ExperimentConfig& c, const SweepOptions& opt = {}) {
    return detail::run_sweep_impl<detail::OneBody>(c, opt);
}

inline SweepResult run_manybody_sweep(const ExperimentConfig& c, const SweepOptions& opt = {}) {
    return detail::run_sweep_impl<detail::ManyBody>(c, opt);
}

}  // namespace dkg::lab
