"""Coefficients of the fourth-order commutator-free Magnus step.

One step over dt samples H at the two Gauss-Legendre nodes and applies
two unitary exponentials, each of an averaged Hamiltonian whose weights
sum to dt/2 (a "half step"):

    psi <- exp(-i dt (a1 H1 + a2 H2)) exp(-i dt (a2 H1 + a1 H2)) psi

with H1 = H(t + c1 dt), H2 = H(t + c2 dt).  Each factor is exactly
unitary for Hermitian H, so norm drift is a genuine error signal.
"""

import math

_S3 = math.sqrt(3.0)

CF4_C1 = 0.5 - _S3 / 6.0
CF4_C2 = 0.5 + _S3 / 6.0
CF4_A1 = 0.25 - _S3 / 6.0
CF4_A2 = 0.25 + _S3 / 6.0
