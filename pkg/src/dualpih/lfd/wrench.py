"""Environment wrench estimation and its friction decomposition.

At quasi-static equilibrium the environment balances the controller, so
the environment wrench is the negated commanded wrench. A sliding contact
splits that force into a normal part and a Coulomb part opposing the
motion, ``F = F_N - mu |F_N| v_a``. The torque of the same contact about
the measurement point is ``T = r x F``.
"""

from __future__ import annotations

import numpy as np

from ..frames import Wrench

FORCE_FLOOR = 0.5
SPEED_FLOOR = 1e-3
NORMAL_FLOOR = 1e-6


class NoSurface(ValueError):
    """No normal force is left after removing the friction component."""


def estimate_environment_wrench(sample) -> Wrench:
    """Environment wrench from a ``(t, pose, commanded wrench, twist)`` sample
    or from a bare commanded :class:`Wrench`."""
    w = sample if isinstance(sample, Wrench) else sample[2]
    if w is None:
        raise ValueError("sample has no commanded wrench")
    return -w


def compose_friction(F_N, mu: float, v_a) -> np.ndarray:
    """Forward model: total contact force for normal force ``F_N`` sliding along ``v_a``."""
    F_N = np.asarray(F_N, dtype=float)
    v = np.asarray(v_a, dtype=float)
    v = v / np.linalg.norm(v)
    return F_N - abs(mu) * np.linalg.norm(F_N) * v


def decompose_friction(F, v_a, normal_floor: float = NORMAL_FLOOR) -> tuple[np.ndarray, float]:
    """Split an environment force into ``(F_N, mu_hat)``.

    The normal force is the part of ``F`` orthogonal to the sliding
    direction; the friction coefficient is the opposing tangential part over
    its magnitude, clamped at zero. Raises :class:`NoSurface` when the normal
    part is below ``normal_floor``.
    """
    F = np.asarray(F, dtype=float)
    v = np.asarray(v_a, dtype=float)
    v = v / np.linalg.norm(v)
    ft = float(F @ v)
    F_N = F - ft * v
    n = float(np.linalg.norm(F_N))
    if n <= normal_floor:
        raise NoSurface(f"normal force {n:.3g} N is below the floor {normal_floor:.3g} N")
    return F_N, max(0.0, -ft / n)


def contact_torque(r, F_N, F_mu) -> np.ndarray:
    """Torque about the measurement point of a contact at offset ``r``."""
    r = np.asarray(r, dtype=float)
    return np.cross(r, F_mu) + np.cross(r, F_N)


def contact_lever(F, T) -> np.ndarray:
    """Shortest offset from the measurement point to the line of action.

    Only the part of ``r`` orthogonal to ``F`` is observable from ``T = r x F``;
    this returns exactly that part, ``F x T / |F|^2``.
    """
    F = np.asarray(F, dtype=float)
    T = np.asarray(T, dtype=float)
    f2 = float(F @ F)
    if f2 <= 0.0:
        raise NoSurface("zero force has no line of action")
    return np.cross(F, T) / f2
