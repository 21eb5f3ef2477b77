"""Why N = 10 is the borderline for the exponential nonlinearity.

Three independent views of the same threshold:

1. the Emden change of variables turns the radial ODE into an autonomous
   system whose fixed point stops spiralling at N = 10;
2. the singular solution u_s = ln(2(N-2)/r^2) becomes stable exactly there;
3. a regular solution shot from the origin stays below u_s from N = 10 on,
   which is what makes it stable.

Run:  python3 demos/01_dimension_ten.py
"""

from elliptica.emden import build_emden, classify_fixed_point, exact_discriminant, singular_solution
from elliptica.model import make_builtin_nonlinearity
from elliptica.radial_solver import ShootingParams, shoot
from elliptica.stability import Annulus, comparison_stability_test, lambda1, singular_operator

print("Fixed point of the Emden system for f(u) = e^u")
print(f"{'N':>3}  {'discriminant':>13}  type")
for N in range(7, 14):
    kind = classify_fixed_point(build_emden("exp", N))
    print(f"{N:>3}  {str(exact_discriminant('exp', N)):>13}  {kind.value}")

print("\nFirst radial eigenvalue of the linearization about u_s on 0.1 < r < 10")
for N in (8, 9, 10, 11, 12):
    lam = lambda1(singular_operator("exp", N, Annulus(0.1, 10.0), 4096))
    print(f"  N = {N:2d}:  lambda1 = {lam:+.6f}  ({'stable' if lam >= 0 else 'unstable'})")

print("\nDoes the regular solution from u(0) = 0 stay below u_s?")
f = make_builtin_nonlinearity("exp")
for N in (9, 10, 11):
    prof = shoot(f, ShootingParams(N, 0.0, 1e4, mesh_ratio=1.01))
    res = comparison_stability_test(prof, singular_solution("exp", N))
    where = "" if res.below_singular else f"  (first crossing at r = {res.first_violation:.4g})"
    print(f"  N = {N:2d}:  below u_s everywhere: {res.below_singular}{where}")
