#include "sps/emitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "sps/errors.hpp"
#include "sps/rng.hpp"
#include "sps/units.hpp"

namespace sps::emitter {

namespace {

constexpr std::uint64_t kSaltTrajectory = 0x7472616aULL;
constexpr std::size_t kMaxPhotonBin = 8;

// Composite Simpson integration on a uniform grid; odd interval counts get a
// 3/8 tail so accuracy stays O(dt^4) throughout.
double quad_uniform(const std::vector<double>& y, double dt) {
    const std::size_t n = y.size();
    if (n < 2) return 0.0;
    const std::size_t m = n - 1;
    if (m == 1) return 0.5 * dt * (y[0] + y[1]);

    auto simpson = [&](std::size_t first, std::size_t intervals) {
        double s = y[first] + y[first + intervals];
        for (std::size_t j = 1; j < intervals; ++j) s += y[first + j] * (j % 2 ? 4.0 : 2.0);
        return s * dt / 3.0;
    };
    auto rule38 = [&](std::size_t first) {
        return 3.0 * dt / 8.0 *
               (y[first] + 3.0 * y[first + 1] + 3.0 * y[first + 2] + y[first + 3]);
    };

    if (m % 2 == 0) return simpson(0, m);
    if (m == 3) return rule38(0);
    return simpson(0, m - 3) + rule38(m - 3);
}

struct Rates {
    double gamma;     // ps^-1
    double dephase;   // ps^-1, fast component
    double delta;     // rad/ps
};

Rates rates_of(const EmitterParams& e) {
    return Rates{e.gamma_ns * kPerNsToPerPs, e.gamma_dephase_ns * kPerNsToPerPs,
                 angular_per_ps(e.detuning_ghz)};
}

void validate_drive_grid(const DriveProfile& drive, const EmitterParams& e) {
    if (drive.size() < 2) throw PreconditionError("drive needs at least 2 samples");
    if (!(drive.dt_ps > 0.0)) throw PreconditionError("drive dt_ps must be positive");

    const double om_max = drive.max_rabi();
    const double gamma_ps = e.gamma_ns * kPerNsToPerPs;
    const double rabi_limit = om_max > 0.0 ? 0.05 / om_max : std::numeric_limits<double>::infinity();
    const double decay_limit = 0.02 / gamma_ps;
    if (drive.dt_ps > rabi_limit)
        throw PreconditionError("drive grid too coarse: dt=" + std::to_string(drive.dt_ps) +
                                " ps exceeds Rabi limit 0.05/max|Omega|=" +
                                std::to_string(rabi_limit) + " ps");
    if (drive.dt_ps > decay_limit)
        throw PreconditionError("drive grid too coarse: dt=" + std::to_string(drive.dt_ps) +
                                " ps exceeds decay limit 0.02/gamma=" +
                                std::to_string(decay_limit) + " ps");
}

// Drive samples on the half-step grid t0 + j*dt/2, j = 0 .. 2(n-1), so each
// RK4 step reads its three abscissae without interpolation.
struct HalfGridDrive {
    std::vector<double> re, im;

    explicit HalfGridDrive(const DriveProfile& d) {
        const std::size_t n = d.size();
        re.resize(2 * n - 1);
        im.resize(2 * n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            re[2 * j] = d.rabi[j].real();
            im[2 * j] = d.rabi[j].imag();
        }
        for (std::size_t j = 0; j + 1 < n; ++j) {
            re[2 * j + 1] = 0.5 * (re[2 * j] + re[2 * j + 2]);
            im[2 * j + 1] = 0.5 * (im[2 * j] + im[2 * j + 2]);
        }
    }
};

// Piecewise-linear drive lookup at arbitrary time, for partial steps around
// quantum jumps.
struct DriveInterp {
    const DriveProfile& d;

    void at(double t, double& out_re, double& out_im) const {
        const double u = (t - d.t0_ps) / d.dt_ps;
        if (u <= 0.0) {
            out_re = d.rabi.front().real();
            out_im = d.rabi.front().imag();
            return;
        }
        const auto last = static_cast<double>(d.size() - 1);
        if (u >= last) {
            out_re = d.rabi.back().real();
            out_im = d.rabi.back().imag();
            return;
        }
        const auto j = static_cast<std::size_t>(u);
        const double frac = u - static_cast<double>(j);
        out_re = d.rabi[j].real() * (1.0 - frac) + d.rabi[j + 1].real() * frac;
        out_im = d.rabi[j].imag() * (1.0 - frac) + d.rabi[j + 1].imag() * frac;
    }
};

// Bloch state (rho_ee, rho_gg, Re rho_ge, Im rho_ge) with rho_ge = <g|rho|e>.
struct BlochState {
    double ee, gg, ger, gei;
};

// drho_ee = Im(Omega rho_ge) - gamma rho_ee
// drho_ge = -i conj(Omega)/2 (rho_ee - rho_gg) - (i delta + gamma/2 + gamma_phi) rho_ge
// The coherence decay rate gamma_phi is the full pure-dephasing rate.
struct BlochKernel {
    double g;        // gamma, ps^-1
    double gphi;     // pure dephasing, ps^-1
    double delta;    // rad/ps

    BlochState deriv(const BlochState& s, double om_r, double om_i) const {
        const double pump = om_r * s.gei + om_i * s.ger;  // Im(Omega rho_ge)
        const double w = s.ee - s.gg;
        const double decay = 0.5 * g + gphi;
        BlochState d;
        d.ee = pump - g * s.ee;
        d.gg = -pump + g * s.ee;
        d.ger = -0.5 * w * om_i + delta * s.gei - decay * s.ger;
        d.gei = -0.5 * w * om_r - delta * s.ger - decay * s.gei;
        return d;
    }

    void rk4(BlochState& s, double h, double om0r, double om0i, double omhr, double omhi,
             double om1r, double om1i) const {
        const BlochState k1 = deriv(s, om0r, om0i);
        BlochState t{s.ee + 0.5 * h * k1.ee, s.gg + 0.5 * h * k1.gg, s.ger + 0.5 * h * k1.ger,
                     s.gei + 0.5 * h * k1.gei};
        const BlochState k2 = deriv(t, omhr, omhi);
        t = {s.ee + 0.5 * h * k2.ee, s.gg + 0.5 * h * k2.gg, s.ger + 0.5 * h * k2.ger,
             s.gei + 0.5 * h * k2.gei};
        const BlochState k3 = deriv(t, omhr, omhi);
        t = {s.ee + h * k3.ee, s.gg + h * k3.gg, s.ger + h * k3.ger, s.gei + h * k3.gei};
        const BlochState k4 = deriv(t, om1r, om1i);
        const double c = h / 6.0;
        s.ee += c * (k1.ee + 2.0 * (k2.ee + k3.ee) + k4.ee);
        s.gg += c * (k1.gg + 2.0 * (k2.gg + k3.gg) + k4.gg);
        s.ger += c * (k1.ger + 2.0 * (k2.ger + k3.ger) + k4.ger);
        s.gei += c * (k1.gei + 2.0 * (k2.gei + k3.gei) + k4.gei);
    }
};

// Unnormalised amplitudes (a_g, a_e) under the non-Hermitian generator: the
// ground amplitude decays at gphi/4 (dephasing channel), the excited one at
// gamma/2 + gphi/4, and the squared norm tracks the no-jump probability.
struct AmpState {
    double gr, gi, er, ei;

    double norm2() const { return gr * gr + gi * gi + er * er + ei * ei; }
    double excited2() const { return er * er + ei * ei; }
};

struct HeffKernel {
    double cg;      // gphi/4
    double ce;      // gamma/2 + gphi/4
    double delta;   // rad/ps

    AmpState deriv(const AmpState& s, double om_r, double om_i) const {
        // d a_g = -i conj(Omega)/2 a_e - cg a_g
        // d a_e = -i Omega/2 a_g + (i delta - ce) a_e
        const double xg = 0.5 * (om_r * s.er + om_i * s.ei);
        const double yg = 0.5 * (om_r * s.ei - om_i * s.er);
        const double xe = 0.5 * (om_r * s.gr - om_i * s.gi);
        const double ye = 0.5 * (om_r * s.gi + om_i * s.gr);
        AmpState d;
        d.gr = yg - cg * s.gr;
        d.gi = -xg - cg * s.gi;
        d.er = ye - delta * s.ei - ce * s.er;
        d.ei = -xe + delta * s.er - ce * s.ei;
        return d;
    }

    void rk4(AmpState& s, double h, double om0r, double om0i, double omhr, double omhi,
             double om1r, double om1i) const {
        const AmpState k1 = deriv(s, om0r, om0i);
        AmpState t{s.gr + 0.5 * h * k1.gr, s.gi + 0.5 * h * k1.gi, s.er + 0.5 * h * k1.er,
                   s.ei + 0.5 * h * k1.ei};
        const AmpState k2 = deriv(t, omhr, omhi);
        t = {s.gr + 0.5 * h * k2.gr, s.gi + 0.5 * h * k2.gi, s.er + 0.5 * h * k2.er,
             s.ei + 0.5 * h * k2.ei};
        const AmpState k3 = deriv(t, omhr, omhi);
        t = {s.gr + h * k3.gr, s.gi + h * k3.gi, s.er + h * k3.er, s.ei + h * k3.ei};
        const AmpState k4 = deriv(t, om1r, om1i);
        const double c = h / 6.0;
        s.gr += c * (k1.gr + 2.0 * (k2.gr + k3.gr) + k4.gr);
        s.gi += c * (k1.gi + 2.0 * (k2.gi + k3.gi) + k4.gi);
        s.er += c * (k1.er + 2.0 * (k2.er + k3.er) + k4.er);
        s.ei += c * (k1.ei + 2.0 * (k2.ei + k3.ei) + k4.ei);
    }

    // One step over [t, t+h] with drive values interpolated from the profile.
    void rk4_interp(AmpState& s, const DriveInterp& interp, double t, double h) const {
        double r0, i0, rh, ih, r1, i1;
        interp.at(t, r0, i0);
        interp.at(t + 0.5 * h, rh, ih);
        interp.at(t + h, r1, i1);
        rk4(s, h, r0, i0, rh, ih, r1, i1);
    }
};

}  // namespace

void EmitterParams::validate() const {
    if (!(gamma_ns > 0.0)) throw PreconditionError("gamma must be positive");
    if (gamma_dephase_ns < 0.0) throw PreconditionError("gamma_dephase must be >= 0");
    if (gamma_sd_ns < 0.0) throw PreconditionError("gamma_sd must be >= 0");
    if (!(tau_c_us > 0.0)) throw PreconditionError("tau_c must be positive");
}

DriveProfile DriveProfile::from_pulse(const PulseField& pulse, double coupling) {
    DriveProfile d;
    d.t0_ps = pulse.t0_ps;
    d.dt_ps = pulse.dt_ps;
    d.rabi.resize(pulse.size());
    for (std::size_t i = 0; i < pulse.size(); ++i) d.rabi[i] = coupling * pulse.samples[i];
    return d;
}

DriveProfile DriveProfile::scaled(double factor) const {
    DriveProfile d = *this;
    for (auto& v : d.rabi) v *= factor;
    return d;
}

double DriveProfile::area_rad() const {
    double acc = 0.0;
    for (const auto& v : rabi) acc += std::abs(v);
    return acc * dt_ps;
}

double DriveProfile::max_rabi() const {
    double mx = 0.0;
    for (const auto& v : rabi) mx = std::max(mx, std::abs(v));
    return mx;
}

BlochResult bloch_integrate(const DriveProfile& drive, const EmitterParams& e) {
    e.validate();
    validate_drive_grid(drive, e);

    const Rates rt = rates_of(e);
    const BlochKernel kernel{rt.gamma, rt.dephase, rt.delta};
    const HalfGridDrive half(drive);
    const std::size_t n = drive.size();
    const double h = drive.dt_ps;

    BlochState s{0.0, 1.0, 0.0, 0.0};
    BlochResult result;
    result.dt_ps = h;
    result.excited_pop_trace.resize(n);
    result.excited_pop_trace[0] = 0.0;

    double max_trace_err = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        kernel.rk4(s, h, half.re[2 * j], half.im[2 * j], half.re[2 * j + 1], half.im[2 * j + 1],
                   half.re[2 * j + 2], half.im[2 * j + 2]);
        result.excited_pop_trace[j + 1] = s.ee;
        max_trace_err = std::max(max_trace_err, std::abs(s.ee + s.gg - 1.0));
    }

    if (!std::isfinite(s.ee) || !std::isfinite(s.ger))
        throw NumericalError("density-matrix integration diverged");

    // Photons emitted during the window plus the excited fraction still
    // waiting to decay at the end of it.
    result.mean_photons = rt.gamma * quad_uniform(result.excited_pop_trace, h) + s.ee;
    result.max_trace_error = max_trace_err;
    return result;
}

double EmissionOutcome::mean_photons() const {
    double acc = 0.0;
    for (std::size_t k = 0; k < pn.size(); ++k) acc += static_cast<double>(k) * pn[k];
    return acc;
}

EmissionOutcome mcwf_simulate(const DriveProfile& drive, const EmitterParams& e,
                              std::uint64_t n_trajectories, std::uint64_t seed) {
    e.validate();
    validate_drive_grid(drive, e);
    if (n_trajectories == 0) throw PreconditionError("need at least one trajectory");

    const Rates rt = rates_of(e);
    const double gphi = rt.dephase;
    const HeffKernel kernel{0.25 * gphi, 0.5 * rt.gamma + 0.25 * gphi, rt.delta};
    const HalfGridDrive half(drive);
    const DriveInterp interp{drive};
    const std::size_t n = drive.size();
    const double h = drive.dt_ps;
    const double t_end = drive.time_at(n - 1);

    EmissionOutcome out;
    out.dt_ps = h;
    out.n_trajectories = n_trajectories;
    out.seed = seed;
    out.pn.assign(kMaxPhotonBin + 1, 0.0);
    out.excited_pop_trace.assign(n, 0.0);
    out.jump_records_ps.resize(n_trajectories);

    std::vector<std::uint64_t> counts(kMaxPhotonBin + 1, 0);
    const std::uint64_t root = derive_key(seed, kSaltTrajectory);

    for (std::uint64_t traj = 0; traj < n_trajectories; ++traj) {
        CounterRng rng(derive_key(root, traj));
        AmpState s{1.0, 0.0, 0.0, 0.0};
        double r = 1.0 - rng.u01();  // next no-jump threshold, in (0, 1]
        auto& records = out.jump_records_ps[traj];

        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double t_a = drive.time_at(j);
            const double t_b = t_a + h;

            AmpState seg_state = s;
            double t_seg = t_a;
            kernel.rk4(s, h, half.re[2 * j], half.im[2 * j], half.re[2 * j + 1],
                       half.im[2 * j + 1], half.re[2 * j + 2], half.im[2 * j + 2]);

            while (s.norm2() < r) {
                // The norm crossed the threshold inside (t_seg, t_b]: bisect
                // for the crossing, using the segment start as the anchor.
                double lo = 0.0, hi = 1.0;
                const double seg_h = t_b - t_seg;
                AmpState probe = seg_state;
                for (int it = 0; it < 30; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    probe = seg_state;
                    kernel.rk4_interp(probe, interp, t_seg, mid * seg_h);
                    if (probe.norm2() < r)
                        hi = mid;
                    else
                        lo = mid;
                }
                probe = seg_state;
                kernel.rk4_interp(probe, interp, t_seg, hi * seg_h);
                const double t_jump = t_seg + hi * seg_h;

                const double rad = rt.gamma * probe.excited2();
                const double deph = 0.5 * gphi * probe.norm2();
                if (rad + deph <= 0.0) break;

                if (rng.u01() < rad / (rad + deph)) {
                    // Photon emitted; collapse to the ground state and keep
                    // integrating, which is what allows re-excitation.
                    records.push_back(t_jump - drive.t0_ps);
                    s = AmpState{1.0, 0.0, 0.0, 0.0};
                } else {
                    // Dephasing jump: sigma_z flips the ground amplitude sign.
                    const double inv = 1.0 / std::sqrt(probe.norm2());
                    s = AmpState{-probe.gr * inv, -probe.gi * inv, probe.er * inv,
                                 probe.ei * inv};
                }
                r = 1.0 - rng.u01();

                seg_state = s;
                t_seg = t_jump;
                kernel.rk4_interp(s, interp, t_seg, t_b - t_seg);
            }

            out.excited_pop_trace[j + 1] += s.excited2() / s.norm2();
        }

        // Excited population left at the window end decays radiatively with
        // no drive present; sample that emission analytically.
        const double p_tail = s.excited2() / s.norm2();
        if (rng.u01() < p_tail)
            records.push_back((t_end - drive.t0_ps) + rng.exponential(rt.gamma));

        const std::size_t bin = std::min(records.size(), kMaxPhotonBin);
        ++counts[bin];
    }

    const auto inv_n = 1.0 / static_cast<double>(n_trajectories);
    for (std::size_t k = 0; k < counts.size(); ++k)
        out.pn[k] = static_cast<double>(counts[k]) * inv_n;
    for (auto& v : out.excited_pop_trace) v *= inv_n;
    return out;
}

double g2_from_pn(std::span<const double> pn) {
    double mean = 0.0, pairs = 0.0;
    for (std::size_t k = 0; k < pn.size(); ++k) {
        const auto n = static_cast<double>(k);
        mean += n * pn[k];
        pairs += n * (n - 1.0) * pn[k];
    }
    if (!(mean > 0.0)) throw PreconditionError("g2 undefined for zero mean photon number");
    return pairs / (mean * mean);
}

double g2_se_from_pn(std::span<const double> pn, std::uint64_t n_trajectories) {
    // Delta method on the multinomial: g2 = S2/S1^2 with S1 = sum n pn,
    // S2 = sum n(n-1) pn; gradient per category k is (k(k-1) - 2 g2 S1 k)/S1^2.
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < pn.size(); ++k) {
        const auto n = static_cast<double>(k);
        s1 += n * pn[k];
        s2 += n * (n - 1.0) * pn[k];
    }
    if (!(s1 > 0.0) || n_trajectories == 0) return 0.0;
    const double g2 = s2 / (s1 * s1);
    double ex = 0.0, ex2 = 0.0;
    for (std::size_t k = 0; k < pn.size(); ++k) {
        const auto n = static_cast<double>(k);
        const double grad = (n * (n - 1.0) - 2.0 * g2 * s1 * n) / (s1 * s1);
        ex += pn[k] * grad;
        ex2 += pn[k] * grad * grad;
    }
    const double var = (ex2 - ex * ex) / static_cast<double>(n_trajectories);
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

std::string emission_json(const EmissionOutcome& outcome, bool include_jump_records) {
    nlohmann::ordered_json j;
    j["n_trajectories"] = outcome.n_trajectories;
    j["seed"] = outcome.seed;
    j["mean_photons"] = outcome.mean_photons();
    j["pn"] = outcome.pn;
    if (include_jump_records) j["jump_records_ps"] = outcome.jump_records_ps;
    return j.dump(2);
}

std::vector<RabiPoint> rabi_sweep(const DriveProfile& base, std::span<const double> scales,
                                  const EmitterParams& e) {
    const double base_area = base.area_rad();
    double base_energy = 0.0;
    for (const auto& v : base.rabi) base_energy += std::norm(v);
    base_energy *= base.dt_ps;

    std::vector<RabiPoint> points;
    points.reserve(scales.size());
    DriveProfile scaled = base;
    for (double s : scales) {
        if (s < 0.0) throw PreconditionError("amplitude scale must be >= 0");
        for (std::size_t i = 0; i < base.rabi.size(); ++i) scaled.rabi[i] = base.rabi[i] * s;
        const BlochResult r = bloch_integrate(scaled, e);
        points.push_back(RabiPoint{s, s * s * base_energy, s * base_area, r.mean_photons});
    }
    return points;
}

double first_rabi_maximum(const DriveProfile& base, const EmitterParams& e, double scan_limit) {
    if (!(scan_limit > 0.0)) throw PreconditionError("scan limit must be positive");

    DriveProfile scaled = base;
    auto mean_at = [&](double s) {
        for (std::size_t i = 0; i < base.rabi.size(); ++i) scaled.rabi[i] = base.rabi[i] * s;
        return bloch_integrate(scaled, e).mean_photons;
    };

    const double step = 0.025;
    double prev2 = mean_at(step);
    double prev1 = mean_at(2.0 * step);
    for (double s = 3.0 * step; s <= scan_limit + 0.5 * step; s += step) {
        const double cur = mean_at(s);
        if (prev1 > prev2 && prev1 >= cur) {
            // Interior maximum between s - 2*step and s; refine by
            // golden-section search.
            double a = s - 2.0 * step, b = s;
            const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
            double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
            double f1 = mean_at(x1), f2 = mean_at(x2);
            for (int it = 0; it < 50; ++it) {
                if (f1 < f2) {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + gr * (b - a);
                    f2 = mean_at(x2);
                } else {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - gr * (b - a);
                    f1 = mean_at(x1);
                }
            }
            return 0.5 * (a + b);
        }
        prev2 = prev1;
        prev1 = cur;
    }
    throw NumericalError("no interior emission maximum found below scan limit " +
                         std::to_string(scan_limit));
}

std::vector<PurityPoint> purity_vs_width(std::span<const double> widths_ghz,
                                         const EmitterParams& e, const ShapingChain& chain,
                                         std::uint64_t n_trajectories, std::uint64_t seed) {
    if (!chain) throw PreconditionError("shaping chain must be callable");
    for (double w : widths_ghz)
        if (w < 20.0 || w > 200.0)
            throw PreconditionError("spectral width " + std::to_string(w) +
                                    " GHz outside supported range [20, 200]");

    std::vector<PurityPoint> points;
    points.reserve(widths_ghz.size());
    for (std::size_t i = 0; i < widths_ghz.size(); ++i) {
        const DriveProfile drive = chain(widths_ghz[i]);
        const double pi_scale = first_rabi_maximum(drive, e, 2.0);
        const EmissionOutcome out =
            mcwf_simulate(drive.scaled(pi_scale), e, n_trajectories, derive_key(seed, i));
        PurityPoint p;
        p.width_ghz = widths_ghz[i];
        p.pi_scale = pi_scale;
        p.mean_photons = out.mean_photons();
        p.g2 = g2_from_pn(out.pn);
        p.g2_se = g2_se_from_pn(out.pn, n_trajectories);
        points.push_back(p);
    }
    return points;
}

double indistinguishability(const EmitterParams& e, double delay_us) {
    e.validate();
    if (delay_us < 0.0) throw PreconditionError("delay must be >= 0");
    const double g_tau =
        e.gamma_dephase_ns + e.gamma_sd_ns * (1.0 - std::exp(-delay_us / e.tau_c_us));
    return e.gamma_ns / (e.gamma_ns + 2.0 * g_tau);
}

namespace {

constexpr double kTauCapUs = 100.0;

struct FitParams {
    double gd, gsd, tc;
};

FitParams transform(const double* x) {
    auto clamp = [](double v) { return std::max(-60.0, std::min(60.0, v)); };
    FitParams p;
    p.gd = std::exp(clamp(x[0]));
    p.gsd = std::exp(clamp(x[1]));
    p.tc = kTauCapUs / (1.0 + std::exp(-clamp(x[2])));
    return p;
}

double model_visibility(const FitParams& p, double gamma_ns, double delay_us) {
    const double g_tau = p.gd + p.gsd * (1.0 - std::exp(-delay_us / p.tc));
    return gamma_ns / (gamma_ns + 2.0 * g_tau);
}

// Nelder-Mead on 3 parameters; deterministic fixed-iteration descent.
void nelder_mead(std::function<double(const double*)> f, double* x, int max_iter) {
    constexpr int dim = 3;
    double simplex[dim + 1][dim];
    double fv[dim + 1];
    for (int v = 0; v <= dim; ++v) {
        for (int i = 0; i < dim; ++i) simplex[v][i] = x[i];
        if (v > 0) simplex[v][v - 1] += 0.3;
        fv[v] = f(simplex[v]);
    }

    for (int it = 0; it < max_iter; ++it) {
        int lo = 0, hi = 0;
        for (int v = 1; v <= dim; ++v) {
            if (fv[v] < fv[lo]) lo = v;
            if (fv[v] > fv[hi]) hi = v;
        }
        int next_hi = hi == 0 ? 1 : 0;
        for (int v = 0; v <= dim; ++v)
            if (v != hi && fv[v] > fv[next_hi]) next_hi = v;

        double centroid[dim] = {0, 0, 0};
        for (int v = 0; v <= dim; ++v)
            if (v != hi)
                for (int i = 0; i < dim; ++i) centroid[i] += simplex[v][i] / dim;

        double refl[dim];
        for (int i = 0; i < dim; ++i) refl[i] = centroid[i] + (centroid[i] - simplex[hi][i]);
        const double f_refl = f(refl);

        if (f_refl < fv[lo]) {
            double expd[dim];
            for (int i = 0; i < dim; ++i)
                expd[i] = centroid[i] + 2.0 * (centroid[i] - simplex[hi][i]);
            const double f_exp = f(expd);
            if (f_exp < f_refl) {
                std::copy(expd, expd + dim, simplex[hi]);
                fv[hi] = f_exp;
            } else {
                std::copy(refl, refl + dim, simplex[hi]);
                fv[hi] = f_refl;
            }
        } else if (f_refl < fv[next_hi]) {
            std::copy(refl, refl + dim, simplex[hi]);
            fv[hi] = f_refl;
        } else {
            double contr[dim];
            for (int i = 0; i < dim; ++i)
                contr[i] = centroid[i] + 0.5 * (simplex[hi][i] - centroid[i]);
            const double f_contr = f(contr);
            if (f_contr < fv[hi]) {
                std::copy(contr, contr + dim, simplex[hi]);
                fv[hi] = f_contr;
            } else {
                for (int v = 0; v <= dim; ++v) {
                    if (v == lo) continue;
                    for (int i = 0; i < dim; ++i)
                        simplex[v][i] = simplex[lo][i] + 0.5 * (simplex[v][i] - simplex[lo][i]);
                    fv[v] = f(simplex[v]);
                }
            }
        }
    }

    int lo = 0;
    for (int v = 1; v <= 3; ++v)
        if (fv[v] < fv[lo]) lo = v;
    std::copy(simplex[lo], simplex[lo] + 3, x);
}

}  // namespace

DephasingFit fit_dephasing(std::span<const DephasingFitPoint> points, double gamma_ns) {
    if (points.size() < 3)
        throw PreconditionError("dephasing fit needs at least 3 (delay, visibility) points");
    if (!(gamma_ns > 0.0)) throw PreconditionError("gamma must be positive");
    for (const auto& p : points) {
        if (!(p.delay_us > 0.0)) throw PreconditionError("fit delays must be positive");
        if (!(p.visibility > 0.0 && p.visibility <= 1.0))
            throw PreconditionError("fit visibilities must lie in (0, 1]");
    }

    const std::size_t k = points.size();
    auto residuals_of = [&](const double* x, std::vector<double>& r) {
        const FitParams p = transform(x);
        for (std::size_t i = 0; i < k; ++i)
            r[i] = model_visibility(p, gamma_ns, points[i].delay_us) - points[i].visibility;
    };

    // Starting guess: invert the first and last visibilities for the fast rate
    // and the saturated rate.
    auto rate_of = [&](double v) { return std::max(1e-6, 0.5 * gamma_ns * (1.0 / v - 1.0)); };
    const double gd0 = rate_of(points.front().visibility);
    const double g_last = rate_of(points.back().visibility);
    const double tc0 = 50.0;
    const double gsd0 =
        std::max(1e-6, (g_last - gd0) / (1.0 - std::exp(-points.back().delay_us / tc0)));

    double x[3] = {std::log(gd0), std::log(gsd0), 0.0};  // x[2]=0 -> tc = 50 us

    // Iteratively reweighted least squares: after each weighted fit the
    // weights are scaled by the residual magnitudes, which drives the solution
    // toward the minimax (equal-ripple) fit.
    std::vector<double> w(k, 1.0 / static_cast<double>(k));
    std::vector<double> r(k), best_r(k);
    double best_x[3] = {x[0], x[1], x[2]};
    double best_max = std::numeric_limits<double>::infinity();
    std::uint32_t best_iter = 0;

    constexpr std::uint32_t kOuter = 150;
    for (std::uint32_t iter = 0; iter < kOuter; ++iter) {
        auto objective = [&](const double* xx) {
            const FitParams p = transform(xx);
            double acc = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                const double ri =
                    model_visibility(p, gamma_ns, points[i].delay_us) - points[i].visibility;
                acc += w[i] * ri * ri;
            }
            return acc;
        };
        nelder_mead(objective, x, 500);
        residuals_of(x, r);

        double mx = 0.0;
        for (double ri : r) mx = std::max(mx, std::abs(ri));
        if (!std::isfinite(mx)) throw NumericalError("dephasing fit diverged");
        if (mx < best_max) {
            best_max = mx;
            std::copy(x, x + 3, best_x);
            best_r = r;
            best_iter = iter + 1;
        }

        double wsum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            w[i] *= std::abs(r[i]) + 1e-12;
            wsum += w[i];
        }
        for (auto& wi : w) wi /= wsum;
    }

    const FitParams p = transform(best_x);
    DephasingFit fit;
    fit.gamma_dephase_ns = p.gd;
    fit.gamma_sd_ns = p.gsd;
    fit.tau_c_us = p.tc;
    fit.residuals = best_r;
    fit.max_abs_residual = best_max;
    fit.outer_iterations = best_iter;
    return fit;
}

}  // namespace sps::emitter
