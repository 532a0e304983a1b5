"""Oracle checks comparing integrated dynamics with closed forms.

Each check returns a :class:`CheckResult`.  ``FAST_CHECKS`` are per-mode
equivalences that run in seconds; ``FULL_CHECKS`` add the Brillouin-zone
sweeps.  The checks look up :func:`kzlindblad.lindblad.rhs` at call time, so
a tampered right-hand side is caught by the consistency checks.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import linalg

from . import _dopri, analytic, lindblad, liouvillian
from .lindblad import DissipationConfig, IntegratorConfig, ModeState, evolve_modes
from .models import BlochVector, Haldane, QuenchProtocol, RiceMele, Shockley, bloch_vector, bz_grid
from .observables import run_quench, sweep
from .scaling import plateau_detect, powerlaw_fit


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""
    seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"[{tag}] {self.name}: measured={self.measured:.3e} tol={self.tolerance:.3e} "
                f"({self.seconds:.1f}s) {self.detail}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = bool(d["passed"])
        d["measured"] = float(d["measured"])
        d["tolerance"] = float(d["tolerance"])
        return d


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _random_inputs(rng, count):
    """Random (state, Bloch vector, rates) triples; states need not be physical."""
    for _ in range(count):
        s = ModeState(*rng.uniform(0, 1, 4), complex(*rng.uniform(-0.5, 0.5, 2)))
        mod, ph = rng.uniform(0, 2), rng.uniform(0, 2 * np.pi)
        b = BlochVector(mod * math.cos(ph), mod * math.sin(ph), rng.uniform(-5, 5))
        d = DissipationConfig(*rng.uniform(0, 1, 2))
        yield s, b, d


def rhs_matrix(b: BlochVector, d: DissipationConfig) -> np.ndarray:
    """The Liouvillian rebuilt column by column from :func:`lindblad.rhs`.

    ``rhs`` is real-linear in ``(rho_diag, rho23)``; the map on
    ``(rho11..rho44, rho23, rho32)`` follows by splitting ``rho23`` into its
    holomorphic and antiholomorphic parts.
    """
    cols = []
    for k in range(4):
        diag = [0.0] * 4
        diag[k] = 1.0
        cols.append(liouvillian.vectorize(lindblad.rhs(ModeState(*diag, 0j), b, d)))
    e_re = liouvillian.vectorize(lindblad.rhs(ModeState(0, 0, 0, 0, 1 + 0j), b, d))
    e_im = liouvillian.vectorize(lindblad.rhs(ModeState(0, 0, 0, 0, 1j), b, d))
    # rho23 = x + i y, rho32 = x - i y  =>  d/d rho23 = (e_re - i e_im)/2, d/d rho32 = (e_re + i e_im)/2
    cols.append((e_re - 1j * e_im) / 2)
    cols.append((e_re + 1j * e_im) / 2)
    return np.array(cols).T


# ---------------------------------------------------------------------------
# Fast per-mode checks

@_timed
def check_kernel_vs_rhs(count: int = 1000, seed: int = 1) -> CheckResult:
    """Compiled integrator right-hand side against the reference rhs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for s, b, d in _random_inputs(rng, count):
        ref = lindblad.rhs(s, b, d).to_array()
        got = _dopri.mode_rhs(0.0, s.to_array(), b.dx, b.dy, b.dz, 0.0, 1.0, d.gamma_a, d.gamma_b, 1.0)
        worst = max(worst, float(np.max(np.abs(got - ref))))
    tol = 1e-12
    return CheckResult("kernel_vs_rhs", worst < tol, worst, tol, f"{count} random inputs")


@_timed
def check_liouvillian_vs_rhs(count: int = 1000, seed: int = 2) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for s, b, d in _random_inputs(rng, count):
        lhs = liouvillian.assemble(b, d) @ liouvillian.vectorize(s)
        ref = liouvillian.vectorize(lindblad.rhs(s, b, d))
        worst = max(worst, float(np.max(np.abs(lhs - ref))))
    tol = 1e-12
    return CheckResult("liouvillian_vs_rhs", worst < tol, worst, tol, f"{count} random inputs")


def _multiset_distance(a, b) -> float:
    """Largest distance under the best matching of two small eigenvalue sets."""
    from scipy.optimize import linear_sum_assignment

    cost = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


@_timed
def check_eigenvalues_vs_rhs(count: int = 1000, seed: int = 3) -> CheckResult:
    """Closed-form spectrum against the generator implied by the ODE right-hand side."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _, b, d in _random_inputs(rng, count):
        L = rhs_matrix(b, d)
        num = linalg.eigvals(L)
        cf = liouvillian.eigenvalues_closed_form(b, d).values()
        worst = max(worst, _multiset_distance(num, cf) / (1 + np.linalg.norm(L, 2)))
    tol = 1e-9
    return CheckResult("eigenvalues_vs_rhs", worst < tol, worst, tol, f"{count} random inputs")


@_timed
def check_spectrum(count: int = 10_000, seed: int = 4) -> CheckResult:
    """Closed-form eigenvalues against dense eigendecomposition of the assembled matrix."""
    rng = np.random.default_rng(seed)
    worst, worst_re, worst_l0 = 0.0, -np.inf, 0.0
    for _, b, d in _random_inputs(rng, count):
        L = liouvillian.assemble(b, d)
        num = linalg.eigvals(L)
        spec = liouvillian.eigenvalues_closed_form(b, d)
        cf = spec.values()
        worst = max(worst, _multiset_distance(num, cf) / (1 + np.linalg.norm(L, 2)))
        worst_re = max(worst_re, float(cf.real.max()))
        worst_l0 = max(worst_l0, abs(spec.lambda0))
    tol = 1e-9
    ok = worst < tol and worst_re <= 0 and worst_l0 == 0
    return CheckResult("spectrum_closed_form", ok, worst, tol,
                       f"{count} draws; max Re(lambda)={worst_re:.1e}; |lambda0|={worst_l0}")


@_timed
def check_rq_isolated(tol: float = 1e-2) -> CheckResult:
    m, q = RiceMele(), 0.05
    pr = QuenchProtocol(2.0, -2.0, 50.0)
    worst = 0.0
    for d in (DissipationConfig(0, 0), DissipationConfig(0.05, 0.05)):
        tr = lindblad.evolve_mode(m, q, pr, d)
        b_f = bloch_vector(m, q, pr.u_f)
        ref = analytic.rq_uniform_loss(b_f, pr, d)
        worst = max(worst, abs(tr.final.imbalance - ref))
    return CheckResult("rq_closed_form_vs_ode", worst < tol, worst, tol,
                       "Rice-Mele q=0.05, tau_Q=50, gamma in {0, 0.1}")


@_timed
def check_uniform_factorization(tol: float = 1e-6) -> CheckResult:
    m = RiceMele()
    pr = QuenchProtocol(2.0, -2.0, 50.0)
    q = np.linspace(-0.4, 0.4, 9)
    cfg = IntegratorConfig(sample_count=41)
    g = 0.05
    t, y = evolve_modes(m, q, pr, DissipationConfig(g / 2, g / 2), cfg)
    _, y0 = evolve_modes(m, q, pr, DissipationConfig(0, 0), cfg)
    r = (y[..., 2] - y[..., 1]) * np.exp(g * t / 2)
    r0 = y0[..., 2] - y0[..., 1]
    worst = float(np.max(np.abs(r - r0)))
    return CheckResult("uniform_loss_factorization", worst < tol, worst, tol, "9 modes x 41 samples")


@_timed
def check_delta0_closed_forms(tol: float = 1e-8) -> CheckResult:
    """Mode with Delta_q = 0: rescaled imbalances are pure exponentials."""
    m = RiceMele()
    pr = QuenchProtocol(2.0, -2.0, 10.0)
    cfg = IntegratorConfig(sample_count=21)
    worst = 0.0
    for ga, gb in ((0.08, 0.0), (0.0, 0.05), (0.03, 0.01)):
        d = DissipationConfig(ga, gb)
        t, y = evolve_modes(m, np.array([0.0]), pr, d, cfg, initial="b_polarized")
        r_t = np.exp(d.gamma * t / 2) * (y[0, :, 2] - y[0, :, 1])
        rp_t = np.exp(d.gamma * t / 2) * (y[0, :, 0] - y[0, :, 3])
        # relative to the growth scale e^{gamma t/2}
        scale = np.exp(d.gamma * t / 2)
        err_r = np.abs(r_t - np.exp(d.delta * t / 2)) / scale
        err_rp = np.abs(rp_t - (np.exp(d.gamma * t / 2) - np.exp(d.delta * t / 2))) / scale
        worst = max(worst, float(err_r.max()), float(err_rp.max()))
    return CheckResult("delta0_mode_closed_forms", worst < tol, worst, tol,
                       "R~ = e^{delta t/2}, R~' = e^{gamma t/2} - e^{delta t/2}")


@_timed
def check_lld_long_time(tol: float = 0.02) -> CheckResult:
    """Commuting-Liouvillian propagator against the ODE for small Delta_q."""
    m = RiceMele()
    g = 0.1
    worst = 0.0
    qs = np.array([0.02, 0.05, 0.1, 0.15, 0.2])
    for tau, d in itertools.product((200.0, 250.0), (DissipationConfig(g, 0), DissipationConfig(0, g))):
        pr = QuenchProtocol(2.0, -2.0, tau)
        _, y = evolve_modes(m, qs, pr, d)
        for k, q in enumerate(qs):
            ref = liouvillian.lld_long_time_state(m, float(q), pr, d)
            n_ode = y[k, -1, 1] + y[k, -1, 2] + 2 * y[k, -1, 3]
            n_ref = ref.rho22 + ref.rho33 + 2 * ref.rho44
            if n_ref > 1e-3:
                worst = max(worst, abs(n_ode / n_ref - 1))
            else:
                worst = max(worst, abs(n_ode - n_ref))
    return CheckResult("lld_propagator_vs_ode", worst < tol, worst, tol, "gamma tau_Q in {20, 25}, |Delta_q| <= 0.2")


@_timed
def check_lld_gaussian(gamma: float = 0.08, taus=(250.0, 400.0), tol: float = 0.03) -> CheckResult:
    """Per-mode surviving fermion number against exp(-f tau_Q q^2)."""
    m = RiceMele()
    d = DissipationConfig(gamma, 0.0)
    worst = 0.0
    for tau in taus:
        pr = QuenchProtocol(2.0, -2.0, tau)
        f = math.atan(4 * pr.u_i / gamma) - math.atan(4 * pr.u_f / gamma)
        qmax = 2 / math.sqrt(f * tau)
        qs = np.linspace(-qmax, qmax, 41)
        _, y = evolve_modes(m, qs, pr, d)
        n_q = y[:, -1, 1] + y[:, -1, 2] + 2 * y[:, -1, 3]
        ref = np.exp(-f * tau * qs**2)
        worst = max(worst, float(np.max(np.abs(n_q / ref - 1))))
    return CheckResult("lld_gaussian_decay", worst < tol, worst, tol,
                       f"gamma=delta={gamma}, tau_Q in {list(taus)}, |q| <= 2 (f tau_Q)^-1/2")


@_timed
def check_gh(tol: float = 0.03, gammas=(0.01, 0.1)) -> CheckResult:
    """Reconstructed g, h against exp(-pi tau q^2), -exp(-pi tau q^2), absolute error."""
    m = RiceMele()
    pr = QuenchProtocol(2.0, -2.0, 30.0)
    qs = np.linspace(-0.5, 0.5, 41)
    worst = 0.0
    parts = []
    for g in gammas:
        d = DissipationConfig(g, 0.0)
        g_num, h_num = analytic.reconstruct_gh(m, qs, pr, d)
        g_ref, h_ref = analytic.gh_functions(qs, pr.t_f, pr.tau_Q, d)
        eg, eh = float(np.max(np.abs(g_num - g_ref))), float(np.max(np.abs(h_num - h_ref)))
        parts.append(f"gamma={g}: g {eg:.2e}, h {eh:.2e}")
        worst = max(worst, eg, eh)
    return CheckResult("gh_reconstruction", worst < tol, worst, tol, "; ".join(parts))


@_timed
def check_table_uniform(tol: float = 0.01) -> CheckResult:
    """Sublattice densities for equal loss against the table of closed forms."""
    m = RiceMele()
    worst = 0.0
    for g, tau in ((0.0, 100.0), (0.05, 30.0)):
        pr = QuenchProtocol(2.0, -2.0, tau)
        d = DissipationConfig(g / 2, g / 2)
        s = run_quench(m, pr, d, 1024)
        n_tot, n_a, n_b = analytic.fermion_density_closed_form(m, pr, d)
        for key, ref in (("N_total", n_tot), ("N_a", n_a), ("N_b", n_b)):
            worst = max(worst, abs(s[key][-1] / ref - 1))
    return CheckResult("sublattice_densities_uniform_loss", worst < tol, worst, tol,
                       "Rice-Mele grid 1024, (gamma, tau_Q) in {(0,100), (0.05,30)}")


FAST_CHECKS = (
    check_kernel_vs_rhs,
    check_liouvillian_vs_rhs,
    check_eigenvalues_vs_rhs,
    check_spectrum,
    check_rq_isolated,
    check_uniform_factorization,
    check_delta0_closed_forms,
    check_lld_long_time,
    check_lld_gaussian,
    check_gh,
    check_table_uniform,
)


# ---------------------------------------------------------------------------
# Zone-averaged sweeps

UNIFORM_TAUS = (10.0, 30.0, 100.0, 300.0)


@_timed
def criterion_uniform_loss(grid: int = 2048, rates=(0.0, 0.025, 0.05), taus=UNIFORM_TAUS,
                           budget: float = 120.0) -> CheckResult:
    m = RiceMele()
    pr = QuenchProtocol(2.0, -2.0, taus[0])
    worst = worst_table = 0.0
    series = {}
    t0 = time.perf_counter()
    for r in rates:
        d = DissipationConfig(r, r)
        s = sweep(m, pr, d, grid, taus)
        series[r] = s["n"].tolist()
        for tau, n in zip(taus, s["n"]):
            p = pr.with_tau(tau)
            worst = max(worst, abs(n / analytic.n_uniform_two_terms(m, p, d) - 1))
            worst_table = max(worst_table, abs(n / analytic.n_closed_form(m, p, d) - 1))
    elapsed = time.perf_counter() - t0
    ok = worst < 0.02 and worst_table < 0.01 and elapsed < budget
    return CheckResult("uniform_loss_closed_form", ok, worst, 0.02,
                       f"table column max rel err {worst_table:.2e} (tol 1e-2); runtime {elapsed:.0f}s "
                       f"(budget {budget:.0f}s)", extra={"n": series})


@_timed
def criterion_akz(grid: int = 2048, rate: float = 0.025, taus=UNIFORM_TAUS) -> CheckResult:
    m = RiceMele()
    pr = QuenchProtocol(2.0, -2.0, taus[0])
    d = DissipationConfig(rate, rate)
    full = sweep(m, pr, d, grid, taus)["n"]
    nj = sweep(m, pr, d, grid, taus, variant="no_jump")["n"]
    rise = float(full[-1] - full[0])
    toward_half = abs(full[-1] - 0.5) < abs(full[0] - 0.5)
    non_monotone = bool(np.any(np.diff(full) < 0) and np.any(np.diff(full) > 0))
    nj_decreasing = bool(np.all(np.diff(nj) < 0))
    ok = rise > 0 and (non_monotone or toward_half) and nj_decreasing
    return CheckResult("akz_signature", ok, rise, 0.0,
                       f"n(full)={np.round(full, 5).tolist()}, n(no_jump)={np.round(nj, 6).tolist()}",
                       extra={"full": full.tolist(), "no_jump": nj.tolist()})


@_timed
def criterion_kz_lld(grid: int = 2048, gammas=(0.04, 0.08), taus=(50.0, 100.0, 200.0, 400.0, 800.0),
                     budget: float = 300.0) -> CheckResult:
    m = RiceMele()
    pr = QuenchProtocol(2.0, -2.0, taus[0])
    worst_exp = worst_pref = 0.0
    fits = {}
    t0 = time.perf_counter()
    for g in gammas:
        s = sweep(m, pr, DissipationConfig(g, 0.0), grid, taus)
        fit = powerlaw_fit(s, "N_total")
        fits[g] = (fit.exponent, fit.prefactor)
        worst_exp = max(worst_exp, abs(fit.exponent + 0.5))
        worst_pref = max(worst_pref, abs(fit.prefactor * 2 * math.pi - 1))
    elapsed = time.perf_counter() - t0
    ok = worst_exp < 0.05 and worst_pref < 0.10 and elapsed < budget
    return CheckResult("kz_scaling_lld", ok, worst_exp, 0.05,
                       f"prefactor rel err {worst_pref:.2e} (tol 0.1); fits {fits}; runtime {elapsed:.0f}s",
                       extra={"fits": {str(k): v for k, v in fits.items()}})


PKZ_FINALS = (-3.0, -4.0, -6.0)
PKZ_GAMMA_TAUS = (20.0, 50.0, 100.0, 200.0)


@_timed
def criterion_pkz_final(grid: int = 512, gamma: float = 0.1, finals=PKZ_FINALS,
                        gamma_taus=PKZ_GAMMA_TAUS, tol: float = 0.05) -> CheckResult:
    m = RiceMele()
    d = DissipationConfig(0.0, gamma)
    taus = [gt / gamma for gt in gamma_taus]
    worst = 0.0
    table = {}
    for uf in finals:
        pr = QuenchProtocol(-2.0, uf, taus[0])
        s = sweep(m, pr, d, grid, taus)
        errs = []
        for tau, n in zip(taus, s["N_total"]):
            ref = analytic.pkz_prediction(m, "q=0", pr.with_tau(tau), d)
            errs.append(n / ref - 1)
        table[uf] = [round(e, 4) for e in errs]
        worst = max(worst, max(abs(e) for e in errs))
    return CheckResult("pkz_final_density", worst < tol, worst, tol,
                       f"rel err per u_f over gamma tau_Q={list(gamma_taus)}: {table}",
                       extra={"errors": {str(k): v for k, v in table.items()}})


@_timed
def criterion_pkz_time_series(grid: int = 512, gamma: float = 0.1, u_f: float = -6.0,
                              gamma_tau: float = 200.0, tol: float = 0.05) -> CheckResult:
    m = RiceMele()
    d = DissipationConfig(0.0, gamma)
    pr = QuenchProtocol(-2.0, u_f, gamma_tau / gamma)
    s = run_quench(m, pr, d, grid, IntegratorConfig(sample_count=201))
    t = s.axis_values
    sel = gamma * t > 10
    ref = analytic.pkz_prediction(m, "q=0", pr, d, t=t[sel])
    err = np.abs(s["N_total"][sel] / ref - 1)
    worst = float(err.max())
    k = int(np.argmax(err))
    late = float(err[-1])
    return CheckResult("pkz_time_series", worst < tol, worst, tol,
                       f"u_f={u_f}, gamma tau_Q={gamma_tau}; worst at gamma t={gamma * t[sel][k]:.1f}; "
                       f"final-time err {late:.2e}")


@_timed
def criterion_pkz_plateau(grid: int = 32, gamma: float = 0.1, u_f: float = -60.0,
                          gamma_tau: float = 100.0, tol: float = 0.05) -> CheckResult:
    m = RiceMele()
    d = DissipationConfig(0.0, gamma)
    pr = QuenchProtocol(-2.0, u_f, gamma_tau / gamma)
    s = run_quench(m, pr, d, grid, IntegratorConfig(sample_count=201))
    plat = plateau_detect(s, "N_total")
    ref = analytic.pkz_plateau(pr, d)
    if plat is None:
        return CheckResult("pkz_plateau", False, float("inf"), tol, "no plateau detected")
    err = abs(plat.value / ref - 1)
    return CheckResult("pkz_plateau", err < tol, err, tol,
                       f"plateau {plat.value:.5f} from gamma t={gamma * plat.onset:.0f}, limit {ref:.5f}")


SHOCKLEY_PROTOCOLS = {
    # name: (u_i, u_f, sign of delta)
    "I": (3.0, -3.0, 1),
    "II+": (0.0, -3.0, 1),
    "II-": (0.0, -3.0, -1),
    "III": (3.0, 0.0, 1),
}


@_timed
def criterion_shockley(grid: int = 1024, gamma: float = 0.1, taus=(100.0, 200.0, 400.0, 800.0),
                       tol: float = 0.10, slope_tol: float = 0.07) -> CheckResult:
    m = Shockley(0.5, 0.5)
    worst = worst_slope = 0.0
    rows = {}
    for name, (ui, uf, sgn) in SHOCKLEY_PROTOCOLS.items():
        d = DissipationConfig(gamma, 0.0) if sgn > 0 else DissipationConfig(0.0, gamma)
        pr = QuenchProtocol(ui, uf, taus[-1])
        s = sweep(m, pr, d, grid, taus)
        pred = analytic.kz_prediction(m, pr, d)
        err = s["N_total"][-1] / pred.value - 1
        fit = powerlaw_fit(s, "N_total", window=(taus[1], taus[-1]))
        rows[name] = (pred.formula_id, round(float(err), 4), round(fit.exponent, 4))
        worst = max(worst, abs(err))
        worst_slope = max(worst_slope, abs(fit.exponent + 0.5))
    ok = worst < tol and worst_slope < slope_tol
    return CheckResult("shockley_table", ok, worst, tol,
                       f"slope dev {worst_slope:.3f} (tol {slope_tol}); {rows}", extra={"rows": rows})


@_timed
def criterion_haldane(grid: int = 140, kz_gamma: float = 0.5, kz_taus=(10.0, 20.0, 40.0, 80.0, 160.0),
                      pkz_gamma: float = 0.5, pkz_tau: float = 200.0, budget: float = 1800.0) -> CheckResult:
    m = Haldane()
    t0 = time.perf_counter()
    d_kz = DissipationConfig(kz_gamma, 0.0)
    pr = QuenchProtocol(0.0, -6.0, kz_taus[0])
    s = sweep(m, pr, d_kz, grid, kz_taus)
    fit = powerlaw_fit(s, "N_total")
    ref_pref = 1 / (2 * math.sqrt(3) * math.pi**2)
    pref_err = abs(fit.prefactor / ref_pref - 1)
    d_pkz = DissipationConfig(0.0, pkz_gamma)
    pr_p = QuenchProtocol(0.0, -6.0, pkz_tau)
    s_p = run_quench(m, pr_p, d_pkz, grid)
    pred = analytic.kz_prediction(m, pr_p, d_pkz)
    pkz_err = abs(s_p["N_total"][-1] / pred.value - 1)
    elapsed = time.perf_counter() - t0
    ok = abs(fit.exponent + 1) < 0.1 and pref_err < 0.15 and pkz_err < 0.10 and elapsed < budget
    return CheckResult("haldane_scaling", ok, abs(fit.exponent + 1), 0.1,
                       f"exponent {fit.exponent:.4f}, prefactor rel err {pref_err:.3f} (tol 0.15), "
                       f"pKZ ({pred.formula_id}) rel err {pkz_err:.3f} (tol 0.1); runtime {elapsed:.0f}s",
                       extra={"N_kz": s["N_total"].tolist(), "N_pkz": float(s_p["N_total"][-1])})


@_timed
def criterion_properties(grid: int = 256) -> CheckResult:
    """Trace, positivity and worker-count independence on a lossy run."""
    m = RiceMele()
    pr = QuenchProtocol(2.0, -2.0, 40.0)
    cfg = IntegratorConfig(sample_count=41)
    worst_tr = worst_pos = 0.0
    q = bz_grid(m, grid).momenta
    for d in (DissipationConfig(0.03, 0.0), DissipationConfig(0.02, 0.05)):
        _, y = evolve_modes(m, q, pr, d, cfg)
        worst_tr = max(worst_tr, float(np.max(np.abs(y[..., :4].sum(-1) - 1))))
        worst_pos = max(worst_pos, _max_positivity_violation(y))
    s1 = run_quench(m, pr, DissipationConfig(0.03, 0.0), grid, cfg, workers=1)
    s2 = run_quench(m, pr, DissipationConfig(0.03, 0.0), grid, cfg, workers=2)
    worst_det = max(float(np.max(np.abs(s1[k] - s2[k]))) for k in ("n", "N_total", "N_a", "N_b"))
    ok = worst_tr < 1e-9 and worst_pos < 1e-8 and worst_det < 1e-12
    return CheckResult("property_suite", ok, max(worst_tr, worst_pos), 1e-9,
                       f"trace {worst_tr:.1e}, positivity {worst_pos:.1e}, workers 1 vs 2 {worst_det:.1e}")


def _max_positivity_violation(y) -> float:
    """Most negative eigenvalue of the 4x4 density matrices (as a positive number)."""
    diag = y[..., :4]
    # the 2x2 central block carries the only off-diagonal entry
    a, c = y[..., 1], y[..., 2]
    off2 = y[..., 4] ** 2 + y[..., 5] ** 2
    lam_min = (a + c) / 2 - np.sqrt(((a - c) / 2) ** 2 + off2)
    worst = min(float(diag[..., 0].min()), float(diag[..., 3].min()), float(lam_min.min()))
    return max(0.0, -worst)


FULL_CHECKS = FAST_CHECKS + (
    criterion_uniform_loss,
    criterion_akz,
    criterion_kz_lld,
    criterion_pkz_final,
    criterion_pkz_time_series,
    criterion_pkz_plateau,
    criterion_shockley,
    criterion_haldane,
    criterion_properties,
)


def run_checks(level: str = "fast", log=None) -> list[CheckResult]:
    checks = {"fast": FAST_CHECKS, "full": FULL_CHECKS}[level]
    results = []
    for fn in checks:
        try:
            res = fn()
        except Exception as exc:  # a crashing check is a failing check
            res = CheckResult(fn.__name__.removeprefix("check_").removeprefix("criterion_"),
                              False, float("nan"), float("nan"), f"error: {type(exc).__name__}: {exc}")
        results.append(res)
        if log is not None:
            log(res.line())
    return results
