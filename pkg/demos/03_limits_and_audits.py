"""Limit characterizations, renormings, and the quantitative bound audits.

The joint constant is the small-time limit of the individual constants
and the large-shift limit of the resolvent constants; the averaging
renorming turns one-time contractivity into a global certificate; and
the two headline inequalities (the shifted/one-time assembly for the
joint constant and the quadratic-nearness bound) are audited with every
ingredient computed independently.
"""

import numpy as np

from simgroup import (
    average_renorm,
    classify,
    discrete_similarity_constant,
    expm_semigroup,
    factorization_from_certificate,
    holbrook_bound_audit,
    joint_similarity_constant,
    liapunov_renorm,
    nagy_isometry_test,
    operator_norm,
    post_widder,
    resolvent_constants,
    simconst_bound_audit,
    small_time_constants,
)

A = np.array([[-1.0, 4.0], [0.0, -1.0]])
joint = joint_similarity_constant(A, tol=1e-4).constant
print("joint constant:", joint)

curve = small_time_constants(A)
print("small-time curve (t -> C(T(t))):")
for p in curve.points:
    print(f"  t = {p.parameter:.5f}: {p.constant:.5f}")
print("  sup over grid:", curve.sup_constant, " (approaches the joint constant)")

res = resolvent_constants(A, [4.0, 16.0, 64.0, 256.0])
print("resolvent curve (lam -> C(lam R(lam))):",
      [round(p.constant, 4) for p in res.points])

print("\ntrichotomy case:", classify(A).case)

# Post-Widder approximants converge to the semigroup.
E = expm_semigroup(A, 1.0)
for n in (32, 1024):
    print(f"post-widder n={n}: error {operator_norm(post_widder(A, 1.0, n) - E):.2e}")

# One-time contractivity at tau = 1 (weight diag(1,4)) averages to a
# weight valid for every time at once.
cert = average_renorm(A, np.diag([1.0, 4.0]), 1.0)
print("\naveraged renorming: kappa = %.4f, sweep residual = %.2e"
      % (cert.kappa, cert.residual))
env = liapunov_renorm(A, a=-0.5)
print("envelope exp(-t/2) certificate: kappa =", round(env.kappa, 4))

# Audits: with all ingredients finite the inequalities are theorems.
aud = simconst_bound_audit(A, lam=1.0, tau=1.0)
print(f"\njoint-constant bound audit: {aud.lhs:.4f} <= {aud.rhs:.4f} [{aud.status}]")
T = expm_semigroup(A, 1.0)
v = discrete_similarity_constant(T, tol=1e-4)
fact = factorization_from_certificate(T, v.certificate, horizon=8)
aud2 = holbrook_bound_audit(T, fact)
print(f"quadratic-nearness audit:   {aud2.lhs:.4f} <= {aud2.rhs:.4f} [{aud2.status}]")

# Similarity to an isometric semigroup via two-sided orbit bounds.
S = np.array([[1.0, 0.6], [0.0, 1.0]])
K = S @ np.diag([1j, -0.7j]) @ np.linalg.inv(S)
rep = nagy_isometry_test(K, t_grid=np.linspace(0.25, 60.0, 70))
print("\ntransformed rotation: isometry verdict", rep.positive,
      "| weight condition %.4f | defect %.2e" % (rep.kappa, rep.defect))
