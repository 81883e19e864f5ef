"""Bessel functions needed by the 2D kernel and the disk reference solution."""

import numpy as np
from scipy import special


class DomainError(ValueError):
    pass


def bessel_complex(order, kind, z):
    """J_0, J_1 at real argument or K_0, K_1 at complex argument with Re z > 0.

    Backed by the AMOS routines in :mod:`scipy.special`.  K is evaluated in
    exponentially scaled form and rescaled so that large arguments underflow
    to zero cleanly instead of producing NaN.
    """
    if order not in (0, 1):
        raise DomainError(f"order must be 0 or 1, got {order}")
    if kind == "J":
        x = np.asarray(z)
        if np.iscomplexobj(x) and np.any(np.imag(x) != 0):
            raise DomainError("J is only provided for real arguments")
        x = np.real(x).astype(float)
        return special.j0(x) if order == 0 else special.j1(x)
    if kind == "K":
        zc = np.asarray(z, dtype=complex)
        if np.any(zc.real <= 0):
            raise DomainError("K requires Re(z) > 0")
        return bessel_k(order, zc)
    raise DomainError(f"kind must be 'J' or 'K', got {kind!r}")


def bessel_k(n, z):
    """K_n(z) for Re z > 0, any integer order.

    Large arguments underflow to 0; high orders at small argument overflow
    to inf.
    """
    z = np.asarray(z, dtype=complex)
    with np.errstate(under="ignore", over="ignore", invalid="ignore"):
        scaled = special.kve(n, z)
        out = scaled * np.exp(-z)
        return np.where(np.isfinite(scaled), np.where(np.isnan(out), 0.0, out), np.inf)


def bessel_i(n, z):
    return special.iv(n, np.asarray(z, dtype=complex))


def bessel_i_prime(n, z):
    return special.ivp(n, np.asarray(z, dtype=complex))


def bessel_k_prime(n, z):
    # K_n' = -(K_{n-1} + K_{n+1}) / 2
    return -0.5 * (bessel_k(n - 1, z) + bessel_k(n + 1, z))


def wronskian_residual(z) -> float:
    """|z (I_0 K_1 + I_1 K_0) - 1|, a cheap self-check on K_0, K_1."""
    z = complex(z)
    val = z * (bessel_i(0, z) * bessel_k(1, z) + bessel_i(1, z) * bessel_k(0, z))
    return float(abs(val - 1.0))
