"""Trigonometric polynomials with exact derivatives.

Used for base curves, ruling fields and metric profile functions so that
everything a scenario file can describe is differentiable in closed form.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class TrigPoly:
    """``sum(poly[i] * t**i) + sum(a * sin(w * t + phase))``.

    Parameters
    ----------
    poly : sequence of float
        Polynomial coefficients, lowest degree first.
    trig : sequence of (amplitude, frequency, phase)
        Sine terms.
    """

    poly: tuple = ()
    trig: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "poly", tuple(float(c) for c in self.poly))
        object.__setattr__(self, "trig", tuple(tuple(float(x) for x in t) for t in self.trig))
        for t in self.trig:
            if len(t) != 3:
                raise ValueError("trig terms are (amplitude, frequency, phase)")

    @classmethod
    def constant(cls, c):
        return cls(poly=(c,))

    def __call__(self, t, n=0):
        """Evaluate the ``n``-th derivative at ``t`` (array-like)."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        coeffs = np.array(self.poly, dtype=float)
        for _ in range(n):
            coeffs = coeffs[1:] * np.arange(1, len(coeffs))
        if len(coeffs):
            out = out + np.polynomial.polynomial.polyval(t, coeffs)
        for amp, freq, phase in self.trig:
            # d^n/dt^n sin(w t + c) = w^n sin(w t + c + n pi/2)
            out = out + amp * freq**n * np.sin(freq * t + phase + n * np.pi / 2)
        return out

    def jet(self, t, nmax):
        """Derivatives ``0..nmax`` stacked on a new leading axis."""
        if _kernels.AVAILABLE:
            return _kernels.trig_derivs(t, self.poly, self.trig or np.empty((0, 3)), nmax)
        return np.stack([self(t, n) for n in range(nmax + 1)])

    def derivative(self, n=1):
        return lambda t: self(t, n)


def as_trigpoly(obj):
    """Build a TrigPoly from a number, a dict ``{"poly": ..., "trig": ...}`` or a TrigPoly."""
    if isinstance(obj, TrigPoly):
        return obj
    if isinstance(obj, (int, float)):
        return TrigPoly.constant(obj)
    return TrigPoly(poly=tuple(obj.get("poly", ())), trig=tuple(tuple(t) for t in obj.get("trig", ())))
