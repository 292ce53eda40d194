"""Index bookkeeping on a random symplectic path.

Run: python3 demos/01_index_identities.py
"""
import numpy as np

from brakeindex.iteration import bott_check, decomposition_check
from brakeindex.maslov import i_lagrangian, i_omega, m_eps_signature_stable, theorem21_check
from brakeindex.paths import random_generator_path, rotation_path

rng = np.random.default_rng(7)

# A path gamma(t) in Sp(4) solving gamma' = J B(t) gamma, with B piecewise constant.
path = random_generator_path(2, rng)
P = path.endpoint
print("endpoint P =\n", P.round(3))

# Lagrangian indices against L0 = {0} x R^n and L1 = R^n x {0}
L0, L1 = i_lagrangian(path, 0), i_lagrangian(path, 1)
print(f"i_L0 = {L0.index}, nu_L0 = {L0.nullity}")
print(f"i_L1 = {L1.index}, nu_L1 = {L1.nullity}")

# Their difference is read off the endpoint alone, through the signature of M_eps.
sp, sm = m_eps_signature_stable(P, "+"), m_eps_signature_stable(P, "-")
print(f"sgn M_eps: {sp} (eps > 0), {sm} (eps < 0)")
print("difference identity holds:", theorem21_check(path).passed)

# Periodic indices at 1 and -1 add up to the index of the doubled path.
b = bott_check(path)
print(f"i_1 = {b.i_one.index}, i_-1 = {b.i_minus_one.index}, i(gamma^2) = {b.i_double.index}",
      "ok" if b.passed else "MISMATCH")
print("L0 + L1 decomposition:", decomposition_check(path).passed)

# A rotation sweep: i_1 of t -> R(t) on [0, T] steps by 2 each time T passes 2 pi.
for T in (1.0, 2 * np.pi + 0.5, 4 * np.pi + 0.5):
    print(f"rotation on [0, {T:.2f}]: i_1 = {i_omega(rotation_path(T), 1.0).index}")
