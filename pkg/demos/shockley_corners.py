"""Shockley chain: two gap-closing momenta and four ramp protocols.

Each corner either is crossed (KZ), is approached from the lossless side
without crossing (pKZ), or starts on the lossy side and empties (nothing).
The prediction is the sum over corners.

    python demos/shockley_corners.py
"""

from kzlindblad import DissipationConfig, QuenchProtocol, Shockley, sweep
from kzlindblad.analytic import kz_prediction

model = Shockley(0.5, 0.5)
gamma = 0.1
taus = [200.0, 400.0]
protocols = {
    "I   u 3 -> -3, loss on a": (3.0, -3.0, DissipationConfig(gamma, 0.0)),
    "II  u 0 -> -3, loss on a": (0.0, -3.0, DissipationConfig(gamma, 0.0)),
    "II  u 0 -> -3, loss on b": (0.0, -3.0, DissipationConfig(0.0, gamma)),
    "III u 3 ->  0, loss on a": (3.0, 0.0, DissipationConfig(gamma, 0.0)),
}

for name, (ui, uf, d) in protocols.items():
    s = sweep(model, QuenchProtocol(ui, uf, 1.0), d, 512, taus)
    pred = kz_prediction(model, QuenchProtocol(ui, uf, taus[-1]), d)
    print(f"{name}: N_total={s['N_total'][-1]:.5f}  {pred.formula_id:<14} {pred.value:.5f} "
          f"({s['N_total'][-1] / pred.value - 1:+.1%})")
