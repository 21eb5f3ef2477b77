"""The critical bubble: unstable near the origin, stable far away, sharp decay.

The bubble U(r) = (1 + r^2/(N(N-2)))^{-(N-2)/2} solves -Δu = u^{(N+2)/(N-2)}.
It has one unstable radial direction, is stable outside a ball, and decays
like r^{2-N}.  This script measures each of those facts and compares the
decay with the exponents that stability outside a compact set forces.

Run:  python3 demos/02_bubble_decay.py
"""

import math

from elliptica.asymptotics import fit_gradient_tail, fit_sup_decay, l2star_norm
from elliptica.gallery import bubble
from elliptica.inequality_lab import evaluate_pohozaev, zeta_theorem8
from elliptica.model import alpha_exponent, make_builtin_nonlinearity
from elliptica.stability import morse_index_radial, outside_radius

for N in (3, 4, 5):
    f = make_builtin_nonlinearity("power", p=(N + 2) / (N - 2))
    U = bubble(N, r_max=1e5)
    spec = morse_index_radial(U, f, [20.0, 200.0, 2000.0])
    R0 = outside_radius(U, f, [1000.0])
    print(f"N = {N}")
    print(f"  negative radial eigenvalues on B_20, B_200, B_2000: {list(spec.neg_count)}")
    print(f"  stable outside B_R for R >= {R0:.4f}  (sqrt(N(N-2)) = {math.sqrt(N * (N - 2)):.4f})")
    s, g = fit_sup_decay(U), fit_gradient_tail(U)
    print(f"  sup |u| on [R, 2R]     ~ R^{s.exponent:+.4f}   bound {s.bound:+.4f}  -> {s.verdict}")
    print(f"  energy on B_2R \\ B_R   ~ R^{g.exponent:+.4f}   bound {g.bound:+.4f}  -> {g.verdict}")
    l2 = l2star_norm(U)
    print(f"  critical Sobolev norm  {l2.value:.6g} ({l2.verdict})")

    # weighted Pohozaev-type inequality: needs stability on the support of ζ,
    # so the bubble is concentrated until its unstable core sits inside B_1
    lam = 2 * math.sqrt(N * (N - 2))
    V = bubble(N, r_max=1e4, scale=lam)
    led = evaluate_pohozaev(V, zeta_theorem8(alpha_exponent(N), 10.0, 100.0), f)
    print(f"  Pohozaev ledger (dilation {lam:.3f}): lhs {led.lhs:.4e}  rhs {led.rhs:.4e}  "
          f"error {led.quadrature_error:.1e}  -> {led.verdict}")
    print()
