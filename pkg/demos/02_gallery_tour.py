"""Tour of the example-semigroup gallery and its exact grid identities.

Each construction is sampled on its alignment grid, where the coupling
identities hold to machine precision, and its characteristic quantity is
displayed: divergence of the reflection-coupling constants, the wrap
coupling's contraction weight, the circle interpolant's envelope, and
the quasi-nilpotent decay of fractional integration.
"""

import numpy as np

from simgroup import (
    DyadicSequence,
    GridSpace,
    bhat_skeide,
    discrete_similarity_constant,
    joint_similarity_constant,
    lemerdy_semigroup,
    operator_norm,
    packel_nilpotent_compression,
    packel_nilpotent_lower_bound,
    periodic_shift,
    riemann_liouville,
    right_shift,
    spectral_radius,
    w_semigroup,
    weight_factors,
    weighted_norm,
    wrap_coupling_weight,
    wrap_fill,
)

# --- reflection coupling: nilpotent compressions whose constants diverge
print("nilpotent reflection compressions (window -> constant, certified floor):")
for window in range(2, 5):
    a = DyadicSequence.powers_of_two("Zminus", window)
    N = packel_nilpotent_compression(a, 1.0)
    c = discrete_similarity_constant(N.eval(N.step), tol=2e-3).constant
    floor = packel_nilpotent_lower_bound(a, 1.0)
    print(f"  window {window}: C = {c:.4f} >= {floor:.4f}, N(2b) = 0:",
          operator_norm(N.eval(2.0)) == 0.0)

# --- wrap coupling: exactly contractive in the triangular weight
m = 64
W = w_semigroup(m)
P = wrap_coupling_weight(m)
S, Sinv = weight_factors(P)
worst = max(operator_norm(S @ W.eval(k / m) @ Sinv) for k in range(3 * m + 1))
print(f"\nwrap coupling on {m} cells: max weighted norm over [0,3] = {worst:.15f}")

Rp, V = periodic_shift(m), wrap_fill(m)
print("  unit-time identities R_p(1) = V(1) = I:",
      operator_norm(Rp.eval(1.0) - np.eye(m)) == 0.0,
      operator_norm(V.eval(1.0) - np.eye(m)) == 0.0)

# --- circle interpolant of a non-contraction
T = np.diag([0.3, 2.0])
B1, P_bs = bhat_skeide(T, 128, 1.0)
print("\ncircle interpolant of diag(0.3, 2): T(1) equals I (x) T:",
      operator_norm(B1 - np.kron(np.eye(128), T)) == 0.0)
for t in (0.25, 0.5, 0.75):
    Bt, _ = bhat_skeide(T, 128, t)
    envelope = np.sqrt(1.0 / (1.0 - t) + t * operator_norm(T) ** 2)
    print(f"  t = {t}: weighted norm {weighted_norm(Bt, P_bs):.4f} <= envelope {envelope:.4f}")

# --- fractional integration: quasi-nilpotent, law residual of fitted order
for m in (64, 256):
    sp = GridSpace(1.0, m)
    law = operator_norm(
        riemann_liouville(sp, 0.5) @ riemann_liouville(sp, 0.5) - riemann_liouville(sp, 1.0)
    )
    print(f"\nfractional integration m={m}: law residual {law:.2e},"
          f" spectral radius at t=0.5: {spectral_radius(riemann_liouville(sp, 0.5)):.4f}")

# --- skewed-basis diagonal decay: constants grow with the section size
print("\nskewed-basis sections (n -> joint constant):")
for n in (2, 4, 8):
    sem = lemerdy_semigroup(n)
    print(f"  n = {n}: {joint_similarity_constant(sem.generator, tol=1e-3).constant:.4f}")
