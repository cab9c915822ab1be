# %% [markdown]
# The model profile I_m
#
# The model cluster splits E = {x in R^q : sum x = 0} into the q cells
# where one coordinate beats the others.  Shifting it by x changes the cell
# measures to Psi(x), and I_m(v) is the total interface area of the shifted
# cluster with measures v.  This walk-through checks the closed forms and
# the derivative identities numerically.

# %%
import numpy as np

from multibubble import Phi_inv, model_profile, model_profile_value, phi, psi
from multibubble.checks import gradient_fd_error, hessian_fd_error, random_interior
from multibubble.profile import face_limit_check

np.set_printoptions(precision=6, suppress=True)

# %% Two cells: one half-space, so I_m(t, 1-t) = phi(Phi^{-1}(t)).
for t in (0.1, 0.3, 0.5):
    print(f"t={t:.1f}  I_m={model_profile_value([t, 1 - t]):.10f}  closed form={phi(Phi_inv(t)):.10f}")

# %% Barycentres.  For q=3 every interface is a half-line with area phi(0)/2.
for q in (3, 4, 5):
    rep = model_profile(np.full(q, 1.0 / q))
    print(f"q={q}: I_m = {rep.value:.8f}, Newton iterations {rep.newton_iterations}")
print("q=3 closed form:", 1.5 * phi(0.0))

# %% Gradient and Hessian at an asymmetric point.
v = np.array([0.5, 0.3, 0.2])
rep = model_profile(v)
print("shift x = Psi^{-1}(v):", rep.x)
print("Psi(x):", psi(rep.x))
print("gradient x/sqrt2:", rep.gradient)
print("Hessian -L_A^+:\n", rep.hessian)
print("trace residual |2 I + tr H^{-1}|:", rep.trace_residual)

# %% Finite-difference checks at a few random points.
rng = np.random.default_rng(0)
for q in (2, 3, 4):
    v = random_interior(q, rng)
    print(f"q={q} v={v}: grad rel err {gradient_fd_error(v):.1e}, Hessian rel err {hessian_fd_error(v):.1e}")

# %% The Hessian check near the boundary is limited by the step, not the formula.
v = np.array([0.2992, 0.674, 0.0268])
for h in (1e-3, 5e-4, 2.5e-4):
    print(f"h={h:.1e}: Hessian rel err {hessian_fd_error(v, h=h):.2e}")

# %% Continuity at a face: letting one cell shrink recovers the (q-1)-cell profile.
rep = face_limit_check([0.5, 0.5])
for e, g in zip(rep.eps, rep.gaps):
    print(f"eps={e:.0e}: |I_3 - I_2| = {g:.2e}")
