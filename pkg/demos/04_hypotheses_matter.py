"""Each hypothesis of the Liouville-type results, and an example that drops it.

* u = -|x|^2 with f = 2N is stable but unbounded below: its weighted
  Dirichlet energy grows like R^4 instead of o(ln R).
* tanh(x/sqrt 2) solves u'' + u - u^3 = 0, is monotone (hence stable) and
  not constant, but f changes sign.
* The 2D Liouville solution is stable outside a compact set and only
  satisfies a logarithmic lower bound.
* The Exp solution in dimension 10 is stable everywhere; it is not constant
  because it tends to -infinity, and its weighted energy grows like 4ω ln R.

Run:  python3 demos/04_hypotheses_matter.py
"""

from elliptica.gallery import list_entries, verify_entry
from elliptica.inequality_lab import weighted_energy_growth
from elliptica.model import RadialProfile, make_builtin_nonlinearity, sphere_area
from elliptica.radial_solver import ShootingParams, radial_mesh, shoot

print("Gallery")
for e in list_entries():
    rep = verify_entry(e.id)
    flags = ", ".join(f"{c.name}={c.status}" for c in rep.claims)
    print(f"  {e.id:13s} N={rep.dim:<2d} {flags}")

radii = [2.0 ** k for k in range(4, 11)]
f = make_builtin_nonlinearity("exp")
print("\nint_{B_R} r^{2-N} |grad u|^2 / ln R for the Exp solution in N = 10")
for a in (0.0, 4.0):
    g = weighted_energy_growth(shoot(f, ShootingParams(10, a, 2e3, mesh_ratio=1.01)), radii)
    trend = "decreasing" if g.strictly_decreasing else "increasing" if g.strictly_increasing else "mixed"
    print(f"  u(0) = {a:g}: " + " ".join(f"{v:7.2f}" for v in g.ratios) + f"  ({trend})")
print(f"  slope in ln R tends to 4 * |S^9| = {4 * sphere_area(10):.2f}")

r = radial_mesh(1e-3, 2e3, 1.02)
para = RadialProfile(10, r, -r ** 2, -2 * r, 0.0, -r[-1] ** 2, {"source": "paraboloid"})
g = weighted_energy_growth(para, radii)
print("\nsame ratio for u = -r^2: " + " ".join(f"{v:.3g}" for v in g.ratios))
