"""Closed-form layer: dimension constants, height function, coordinate maps,
blowup profile, linearization potential, nonlinearity and the symmetry mode.

Everything here is a pure function of its value inputs.  Radial arguments may
be scalars or numpy arrays.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DimensionParams",
    "make_params",
    "HeightFunction",
    "StandardHeight",
    "HEIGHT",
    "hsc_map",
    "hsc_inverse",
    "similarity_time_scalar",
    "transition_scalar",
    "blowup_profile",
    "blowup_profile_hsc",
    "potential",
    "potential_ssc",
    "nonlinearity_scalar",
    "nonlinearity_quadratic_coeff",
    "symmetry_mode",
    "initial_time_s0",
]


@dataclass(frozen=True)
class DimensionParams:
    """Odd space dimension d with the derived blowup constants.

    The constants a and b come from the closed-form self-similar profile in
    effective dimension d; they are real and positive only for d >= 7, so the
    fields are None below that.
    """

    d: int
    n: int
    a: float | None = None
    b: float | None = None


def make_params(d: int) -> DimensionParams:
    """Validate d (odd, >= 3) and attach the profile constants for d >= 7."""
    if d != int(d):
        raise ValueError(f"dimension must be an integer, got {d!r}")
    d = int(d)
    if d % 2 == 0:
        raise ValueError(f"dimension must be odd, got d={d}")
    if d < 3:
        raise ValueError(f"dimension must be >= 3, got d={d}")
    n = d - 2
    if n >= 4:
        a = 2.0 * (1.0 + np.sqrt((n - 4.0) / (3.0 * (n - 2.0))))
        b = (2.0 * (n - 4.0) + np.sqrt(3.0 * (n - 2.0) * (n - 4.0))) / 3.0
        return DimensionParams(d=d, n=n, a=float(a), b=float(b))
    return DimensionParams(d=d, n=n)


class HeightFunction:
    """Radial height profile shaping the hyperboloids.

    Subclasses supply h and its first three radial derivatives.  The slope
    must satisfy |h'| < 1 so the level sets stay spacelike.  h_pm(y) = y +- h
    are strictly monotone; their inverses default to a safeguarded Newton
    iteration and may be overridden with closed forms.
    """

    def h(self, y):
        raise NotImplementedError

    def dh(self, y):
        raise NotImplementedError

    def d2h(self, y):
        raise NotImplementedError

    def d3h(self, y):
        raise NotImplementedError

    def dh_over_y(self, y):
        """h'(y)/y with the removable singularity at y = 0 filled in."""
        y = np.asarray(y, dtype=float)
        small = np.abs(y) < 1e-6
        safe = np.where(small, 1.0, y)
        return np.where(small, self.d2h(y), self.dh(safe) / safe)

    def hp(self, y):
        return y + self.h(y)

    def hm(self, y):
        return y - self.h(y)

    def _invert(self, target, sign):
        target = np.asarray(target, dtype=float)
        func = self.hp if sign > 0 else self.hm
        # h_pm' = 1 +- h' in (0, 2): Newton from z = target is safe, but keep
        # a bisection fallback for exotic height profiles.
        z = target.copy()
        for _ in range(100):
            f = func(z) - target
            df = 1.0 + sign * self.dh(z)
            step = f / df
            z = z - step
            if np.max(np.abs(step)) < 1e-14 * (1.0 + np.max(np.abs(z))):
                return z
        lo = np.minimum(z, target) - 10.0
        hi = np.maximum(z, target) + 10.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            gm = func(mid) - target
            lo = np.where(gm < 0, mid, lo)
            hi = np.where(gm >= 0, mid, hi)
        return 0.5 * (lo + hi)

    def hp_inverse(self, target):
        return self._invert(target, +1)

    def hm_inverse(self, target):
        return self._invert(target, -1)


class StandardHeight(HeightFunction):
    """The shipped height profile h(y) = sqrt(2 + y^2) - 2."""

    def h(self, y):
        return np.sqrt(2.0 + np.square(y)) - 2.0

    def dh(self, y):
        return y / np.sqrt(2.0 + np.square(y))

    def d2h(self, y):
        return 2.0 / np.power(2.0 + np.square(y), 1.5)

    def d3h(self, y):
        return -6.0 * y / np.power(2.0 + np.square(y), 2.5)

    def dh_over_y(self, y):
        return 1.0 / np.sqrt(2.0 + np.square(y))

    # h_pm(z) = c reduces to a linear equation after isolating the square
    # root, so the inverses are rational in c.
    def hp_inverse(self, target):
        m = np.asarray(target, dtype=float) + 2.0
        return (m * m - 2.0) / (2.0 * m)

    def hm_inverse(self, target):
        m = 2.0 - np.asarray(target, dtype=float)
        return (2.0 - m * m) / (2.0 * m)


HEIGHT = StandardHeight()


def hsc_map(T, s, y, height: HeightFunction = HEIGHT):
    """Hyperboloidal similarity coordinates -> Cartesian: (s,y) -> (t,x)."""
    es = np.exp(-np.asarray(s, dtype=float))
    y = np.asarray(y, dtype=float)
    return T + es * height.h(y), es * y


def similarity_time_scalar(T, t, x):
    """The scalar g_T with log(g_T) = s along the inverse coordinate map."""
    dt = T - np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    return 1.0 / (dt + 0.5 * np.sqrt(2.0 * (dt * dt + x * x)))


def hsc_inverse(T, t, x):
    """Cartesian -> hyperboloidal similarity coordinates on Omega_T.

    Only defined where |x| > -(T - t); outside, the point is at or beyond the
    future light cone of (T, 0) and a ValueError is raised.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) <= -(T - t)):
        raise ValueError("point outside Omega_T: |x| <= t - T")
    g = similarity_time_scalar(T, t, x)
    return np.log(g), g * x


def transition_scalar(xi):
    """Scalar profile of the diffeomorphism linking standard similarity
    coordinates to the hyperboloidal ones."""
    return 1.0 + 0.5 * np.sqrt(2.0 * (1.0 + np.square(xi)))


def initial_time_s0(eps: float, height: HeightFunction = HEIGHT) -> float:
    """Hyperboloidal time of the initial slice whose tip sits at t = T - 1 - 2*eps."""
    return float(np.log(-height.h(0.0) / (1.0 + 2.0 * eps)))


def _require_constants(params: DimensionParams):
    if params.a is None or params.b is None:
        raise ValueError(f"profile constants undefined for d={params.d} (need d >= 7)")
    return params.a, params.b


def blowup_profile(params: DimensionParams, T, t, x):
    """Extended self-similar blowup solution in Cartesian coordinates."""
    a, b = _require_constants(params)
    dt = T - np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    den = b * dt * dt + x * x
    if np.any(den == 0.0):
        raise ValueError("blowup profile is singular at (t, x) = (T, 0)")
    return -a / den


def blowup_profile_hsc(params: DimensionParams, T, s, y, height: HeightFunction = HEIGHT):
    """Blowup profile and its s-derivative along the similarity coordinates.

    The composition with the coordinate map depends on s only through e^{2s},
    so the s-derivative is twice the value.  T drops out when profile and
    coordinates share the same blowup time; it is accepted for signature
    symmetry with the Cartesian version.
    """
    a, b = _require_constants(params)
    del T
    h = height.h(y)
    val = -np.exp(2.0 * np.asarray(s, dtype=float)) * a / (b * h * h + np.square(y))
    return val, 2.0 * val


def potential(params: DimensionParams, y, height: HeightFunction = HEIGHT):
    """Linearization potential V(y), the s-independent multiplier produced by
    linearizing around the blowup profile."""
    a, b = _require_constants(params)
    d = params.d
    y = np.asarray(y, dtype=float)
    h = height.h(y)
    dh = height.dh(y)
    u = y * dh - h
    w = 1.0 - dh * dh
    y2 = np.square(y)
    return -3.0 * a * (d - 4) * (u * u / w) * ((a - 2.0) * y2 - 2.0 * b * h * h) / np.square(b * h * h + y2)


def potential_ssc(params: DimensionParams, rho):
    """The same potential seen from standard similarity coordinates."""
    a, b = _require_constants(params)
    d = params.d
    rho2 = np.square(np.asarray(rho, dtype=float))
    return -3.0 * (d - 4) * a * ((a - 2.0) * rho2 - 2.0 * b) / np.square(b + rho2)


def nonlinearity_scalar(params: DimensionParams, y, alpha, height: HeightFunction = HEIGHT):
    """Pointwise nonlinearity N(y, alpha) of the autonomous first-order system."""
    a, b = _require_constants(params)
    d = params.d
    y = np.asarray(y, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    h = height.h(y)
    dh = height.dh(y)
    u = y * dh - h
    w = 1.0 - dh * dh
    y2 = np.square(y)
    quad = 3.0 * ((1.0 - a) * y2 + b * h * h) / (b * h * h + y2)
    return -(d - 4) * (u * u / w) * (quad * alpha * alpha + y2 * alpha**3)


def nonlinearity_quadratic_coeff(params: DimensionParams, y, height: HeightFunction = HEIGHT):
    """Half of d^2 N / d alpha^2 at alpha = 0, i.e. the alpha^2 coefficient."""
    a, b = _require_constants(params)
    d = params.d
    y = np.asarray(y, dtype=float)
    h = height.h(y)
    dh = height.dh(y)
    u = y * dh - h
    w = 1.0 - dh * dh
    y2 = np.square(y)
    return -(d - 4) * (u * u / w) * 3.0 * ((1.0 - a) * y2 + b * h * h) / (b * h * h + y2)


def symmetry_mode(params: DimensionParams, y, height: HeightFunction = HEIGHT):
    """Two-component time-translation mode; second component is 3x the first."""
    a, b = _require_constants(params)
    del a
    y = np.asarray(y, dtype=float)
    h = height.h(y)
    first = h / np.square(b * h * h + np.square(y))
    return np.stack([first, 3.0 * first])
