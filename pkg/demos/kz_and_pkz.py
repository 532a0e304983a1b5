"""One lossless sublattice: KZ when the gap closes, pKZ when it never does.

With loss only on a (delta = gamma) and a ramp through u = 0, the surviving
fermion density follows 1/(2 pi sqrt(tau_Q)) independently of gamma.  With
loss only on b and a ramp that stays at u < 0, the Liouvillian gap still
closes asymptotically and the density falls as (gamma tau_Q)^(-1/2).

    python demos/kz_and_pkz.py
"""

import math

from kzlindblad import DissipationConfig, QuenchProtocol, RiceMele, powerlaw_fit, sweep
from kzlindblad.analytic import kz_prediction, pkz_prediction

model = RiceMele()
grid = 1024

print("KZ: u 2 -> -2, loss on a")
taus = [100.0, 200.0, 400.0, 800.0]
for gamma in (0.04, 0.08):
    d = DissipationConfig(gamma, 0.0)
    s = sweep(model, QuenchProtocol(2.0, -2.0, 1.0), d, grid, taus)
    # the law needs gamma tau_Q >> 1; fit the long-ramp end only
    fit = powerlaw_fit(s, "N_total", window=(taus[1], taus[-1]))
    print(f"  gamma={gamma}: exponent {fit.exponent:+.3f}, prefactor {fit.prefactor:.4f} "
          f"(1/(2 pi) = {1 / (2 * math.pi):.4f})")
    pred = kz_prediction(model, QuenchProtocol(2.0, -2.0, taus[-1]), d)
    print(f"    N_total(tau={taus[-1]:.0f}) = {s['N_total'][-1]:.5f}, prediction {pred.value:.5f}")

print("\npKZ: u -2 -> -6, loss on b, gamma = 0.1")
d = DissipationConfig(0.0, 0.1)
gamma_taus = [50.0, 100.0, 200.0]
s = sweep(model, QuenchProtocol(-2.0, -6.0, 1.0), d, 256, [gt / d.gamma for gt in gamma_taus])
for gt, n in zip(gamma_taus, s["N_total"]):
    ref = pkz_prediction(model, "q=0", QuenchProtocol(-2.0, -6.0, gt / d.gamma), d)
    print(f"  gamma tau_Q={gt:5.0f}: N_total {n:.5f}, pKZ law {ref:.5f} ({n / ref - 1:+.1%})")
