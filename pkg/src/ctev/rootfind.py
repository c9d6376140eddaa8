"""Zeros of analytic functions in rectangles of the complex plane.

The number of zeros inside a rectangle is the winding number

    N = (1 / 2 pi i) \\oint f'(z) / f(z) dz,

evaluated with a composite trapezoid rule on the boundary whose resolution is
doubled until two successive estimates round to the same integer and sit
within 0.25 of it, and the node spacing is below the distance ``|f / f'|``
to the nearest zero (a zero hugging an edge is otherwise undercounted
consistently at coarse resolution).  Rectangles are quadrisected until every
box holds a single zero and is small, then each zero is polished by Newton's
method from the box centre.  Boxes that keep a count above one down to
``cluster_size`` are reported as a single zero of that multiplicity, located
at the centroid ``(1 / 2 pi i m) \\oint z f'/f dz`` of the cluster.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exceptions import ContourZeroError, ConvergenceError, InvalidArgumentError

__all__ = [
    "SearchRect",
    "LocatedZero",
    "count_zeros",
    "find_zeros",
    "newton_refine",
]

_SPLIT_FRACTIONS = (0.5, 0.4871, 0.5129, 0.4613, 0.5387, 0.4357)


@dataclass(frozen=True)
class SearchRect:
    """Closed axis-aligned rectangle ``[re_min, re_max] x [im_min, im_max]``.

    ``exclude`` lists singular points of the target function; none of them may
    lie in the closed rectangle.
    """

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    exclude: tuple = field(default=(), compare=False)

    def __post_init__(self):
        vals = (self.re_min, self.re_max, self.im_min, self.im_max)
        if not all(math.isfinite(float(v)) for v in vals):
            raise InvalidArgumentError("rectangle bounds must be finite")
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise InvalidArgumentError(f"degenerate rectangle {vals}")
        for p in self.exclude:
            if self.contains(complex(p)):
                raise InvalidArgumentError(f"excluded point {p} lies inside {vals}")

    @property
    def width(self) -> float:
        return self.re_max - self.re_min

    @property
    def height(self) -> float:
        return self.im_max - self.im_min

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def contains(self, z: complex, slack: float = 0.0) -> bool:
        sx, sy = slack * self.width, slack * self.height
        return (
            self.re_min - sx <= z.real <= self.re_max + sx
            and self.im_min - sy <= z.imag <= self.im_max + sy
        )

    def quadrisect(self, frac: float = 0.5) -> list["SearchRect"]:
        xm = self.re_min + frac * self.width
        ym = self.im_min + frac * self.height
        return [
            SearchRect(self.re_min, xm, self.im_min, ym),
            SearchRect(xm, self.re_max, self.im_min, ym),
            SearchRect(self.re_min, xm, ym, self.im_max),
            SearchRect(xm, self.re_max, ym, self.im_max),
        ]


@dataclass(frozen=True)
class LocatedZero:
    z: complex
    residual: float
    newton_iters: int
    winding_count: int
    converged: bool = True


def _as_vectorized(f: Callable) -> Callable:
    probe = np.array([0.3 + 0.2j, 0.7 + 0.1j])
    try:
        out = np.asarray(f(probe))
        if out.shape == probe.shape:
            return f
    except Exception:
        pass
    return np.vectorize(f, otypes=[complex])


def _diff_step(z):
    return 1e-7 * np.maximum(1.0, np.abs(z))


def _derivative(f, z):
    h = _diff_step(z)
    return (f(z + h) - f(z - h)) / (2.0 * h)


def _contour_nodes(rect: SearchRect, npts: int) -> np.ndarray:
    """Closed polygon nodes (counter-clockwise), spacing roughly uniform."""
    per = 2.0 * (rect.width + rect.height)
    nx = max(8, int(round(npts * rect.width / per)))
    ny = max(8, int(round(npts * rect.height / per)))
    x = np.linspace(rect.re_min, rect.re_max, nx + 1)[:-1]
    y = np.linspace(rect.im_min, rect.im_max, ny + 1)[:-1]
    bottom = x + 1j * rect.im_min
    right = rect.re_max + 1j * y
    top = (rect.re_min + rect.re_max - x) + 1j * rect.im_max
    left = rect.re_min + 1j * (rect.im_min + rect.im_max - y)
    return np.concatenate([bottom, right, top, left])


def _winding_estimate(f, rect: SearchRect, npts: int, rel_floor: float) -> float:
    z = _contour_nodes(rect, npts)
    fz = f(z)
    if not np.all(np.isfinite(fz)) or np.any(fz == 0):
        raise ContourZeroError(f"f vanishes or is non-finite on the contour of {rect}")
    g = _derivative(f, z) / fz
    # 1/|f'/f| estimates the distance from a node to the nearest zero
    if np.max(np.abs(g)) * rel_floor * rect.diameter >= 1.0:
        raise ContourZeroError(f"a zero lies (numerically) on the contour of {rect}")
    dz = 0.5 * (np.roll(z, -1) - np.roll(z, 1))
    # spacing times |f'/f| compares the node gap with the distance to the nearest zero
    spacing = float(np.max(np.abs(g) * np.abs(dz)))
    return float((np.sum(g * dz) / (2j * np.pi)).real), spacing


def count_zeros(
    f: Callable,
    rect: SearchRect,
    quad_pts: int = 256,
    *,
    max_pts: int = 2**17,
    rel_floor: float = 1e-9,
) -> int:
    """Number of zeros (with multiplicity) of analytic ``f`` inside ``rect``.

    ``f`` should accept complex ndarrays; scalar-only callables are wrapped
    with :func:`numpy.vectorize`.

    Raises
    ------
    ContourZeroError
        If a zero sits on the boundary, judged by the Newton distance estimate
        ``|f / f'|`` dropping below ``rel_floor`` times the box diameter.
    ConvergenceError
        If the quadrature has not settled by ``max_pts`` nodes.
    """
    f = _as_vectorized(f)
    return _count(f, rect, quad_pts, max_pts, rel_floor)


def _count(f, rect, quad_pts, max_pts, rel_floor) -> int:
    npts = max(32, int(quad_pts))
    prev, _ = _winding_estimate(f, rect, npts, rel_floor)
    stalls = settled = 0
    while npts < max_pts:
        npts *= 2
        cur, spacing = _winding_estimate(f, rect, npts, rel_floor)
        if spacing <= 1.0 and round(cur) == round(prev) and abs(cur - round(cur)) < 0.25:
            return max(0, int(round(cur)))
        settled = settled + 1 if abs(cur - prev) < 0.02 else 0
        # a zero on an edge pins the estimate at a fraction (1/2 on a side, 1/4 at a corner)
        stalls = stalls + 1 if settled and abs(cur - round(cur)) > 0.15 else 0
        if stalls >= 3:
            raise ContourZeroError(f"a zero lies on (or hugs) the contour of {rect} (estimate {cur:.3f})")
        prev = cur
    if settled >= 3:
        # settled but never resolved: some zero is closer to the contour than the finest node gap
        raise ContourZeroError(f"a zero lies within the finest node spacing of the contour of {rect}")
    raise ConvergenceError(f"winding integral on {rect} did not settle (last {prev:.4f})")


def newton_refine(
    f: Callable,
    z0: complex,
    tol: float = 1e-12,
    *,
    multiplicity: int = 1,
    max_iter: int = 60,
    return_info: bool = False,
):
    """Polish an approximate zero with (multiplicity-corrected) Newton steps.

    The derivative is a central difference with step ``1e-7 * max(1, |z|)``.
    Iteration stops when the step stalls at rounding level; the result must
    satisfy ``|f(z)| <= tol``.

    Raises
    ------
    ConvergenceError
        If ``max_iter`` is exhausted with ``|f(z)| > tol``.
    """
    z = complex(z0)
    fz = complex(f(z))
    steps = []
    it = 0
    for it in range(1, max_iter + 1):
        if fz == 0:
            break
        dfz = complex(_derivative(f, z))
        if dfz == 0 or not np.isfinite(dfz):
            break
        step = multiplicity * fz / dfz
        z_new = z - step
        f_new = complex(f(z_new))
        if abs(f_new) > 10 * abs(fz) and abs(fz) <= tol:
            # already at the noise floor; a further step only hurts
            break
        z, fz = z_new, f_new
        steps.append(abs(step))
        if abs(step) <= 4e-16 * max(1.0, abs(z)):
            break
        if abs(fz) <= tol and len(steps) >= 2 and steps[-1] <= 1e-10 * max(1.0, abs(z)):
            break
    residual = abs(fz)
    if residual > tol:
        if return_info:
            return z, residual, it, False
        raise ConvergenceError(f"Newton from {z0} stalled at |f|={residual:.3e} > tol={tol:.1e}")
    if return_info:
        return z, residual, it, True
    return z


def _split(f, box: SearchRect, cnt: int, quad_pts, max_pts, rel_floor):
    last_err = None
    for frac in _SPLIT_FRACTIONS:
        children = box.quadrisect(frac)
        try:
            counts = [_count(f, c, quad_pts, max_pts, rel_floor) for c in children]
        except (ContourZeroError, ConvergenceError) as err:
            last_err = err
            continue
        if sum(counts) == cnt:
            return list(zip(children, counts))
        last_err = ConvergenceError(f"child counts {counts} do not add up to {cnt} for {box}")
    raise ConvergenceError(f"could not subdivide {box}: {last_err}")


def find_zeros(
    f: Callable,
    rect: SearchRect,
    tol: float = 1e-12,
    *,
    coarse_tol: float | None = None,
    cluster_size: float = 1e-4,
    quad_pts: int = 256,
    max_pts: int = 2**17,
    rel_floor: float = 1e-9,
    scale: Callable | None = None,
) -> list[LocatedZero]:
    """Locate every zero of analytic ``f`` in ``rect``.

    Parameters
    ----------
    f : callable
        Analytic function, ideally vectorized over complex ndarrays.
    rect : SearchRect
        Search region; ``f`` must not vanish on its boundary.
    tol : float
        Residual target ``|f(z)| <= tol`` (or ``|f(z)| / scale(z)`` when
        ``scale`` is given) for every returned zero.
    coarse_tol : float, optional
        Box diameter below which a single-zero box is handed to Newton.
        Defaults to a quarter of the rectangle diameter; boxes whose Newton
        iterate leaves them are subdivided further.
    cluster_size : float
        Boxes still holding several zeros at this diameter are reported as one
        zero at the cluster centroid whose ``winding_count`` is the
        multiplicity.
    scale : callable, optional
        Positive weight used to measure residuals only; counting and Newton
        always work on ``f`` itself.

    Returns
    -------
    list of LocatedZero
        Sorted by ``(Re z, Im z)``; multiplicities sum to ``count_zeros``.
        Zeros whose Newton polish failed come back with ``converged=False``
        at the box centre.

    Raises
    ------
    ConvergenceError
        If subdivision fails or the located multiplicities miss the count.
    """
    f = _as_vectorized(f)
    if coarse_tol is None:
        coarse_tol = 0.25 * rect.diameter
    total = _count(f, rect, quad_pts, max_pts, rel_floor)

    def measure(z):
        r = abs(complex(f(z)))
        return r / float(scale(z)) if scale is not None else r

    results: list[LocatedZero] = []
    queue = [(rect, total)]
    while queue:
        box, cnt = queue.pop(0)
        if cnt == 0:
            continue
        if cnt > 1 and box.diameter < cluster_size:
            results.append(_polish(f, box, cnt, tol, measure))
            continue
        if cnt == 1 and box.diameter < coarse_tol:
            zero = _polish(f, box, 1, tol, measure)
            if zero.converged and box.contains(zero.z, slack=1e-9):
                results.append(zero)
                continue
            if box.diameter < cluster_size:
                results.append(zero if zero.converged else LocatedZero(box.center, measure(box.center), 0, 1, False))
                continue
        queue.extend(_split(f, box, cnt, quad_pts, max_pts, rel_floor))
    merged = _merge(results, tol)
    found = sum(z.winding_count for z in merged)
    if found != total:
        raise ConvergenceError(f"located {found} of {total} zeros in {rect}")
    return merged


def _cauchy_derivative(f, z, h: float, n: int = 16):
    """``f'(z)`` from ``n`` samples on the circle ``|w - z| = h`` (error ``O(h**n)``)."""
    w = np.exp(2j * np.pi * np.arange(n) / n)
    vals = f((z[:, None] + h * w[None, :]).ravel()).reshape(z.size, n)
    return (vals @ np.conj(w)) / (n * h)


def _cluster_centroid(f, box: SearchRect, mult: int, max_side: int = 512) -> complex:
    """Mean of the ``mult`` zeros in ``box`` from the moment of ``z f'/f``.

    Near a zero of multiplicity m the values of f drown in rounding within
    about eps**(1/m), which limits Newton.  On a square five box diameters
    wide f is still accurate, and f' comes from a Cauchy integral rather than
    a finite difference.  Gauss-Legendre per side, doubled until settled.
    """
    half = 5.0 * box.diameter
    c0 = box.center
    sq = SearchRect(c0.real - half, c0.real + half, c0.imag - half, c0.imag + half)
    try:
        ok = _count(f, sq, 256, 2**14, 1e-9) == mult
    except (ContourZeroError, ConvergenceError):
        ok = False
    if not ok:
        sq, half = box, 0.5 * min(box.width, box.height)
    corners = [
        complex(sq.re_min, sq.im_min),
        complex(sq.re_max, sq.im_min),
        complex(sq.re_max, sq.im_max),
        complex(sq.re_min, sq.im_max),
    ]
    prev = None
    q = 32
    while q <= max_side:
        x, w = np.polynomial.legendre.leggauss(q)
        total = 0j
        for a, b in zip(corners, corners[1:] + corners[:1]):
            z = 0.5 * (a + b) + 0.5 * (b - a) * x
            g = _cauchy_derivative(f, z, 0.1 * half) / f(z)
            total += np.sum(w * z * g) * 0.5 * (b - a)
        c = complex(total / (2j * np.pi * mult))
        if prev is not None and abs(c - prev) <= 1e-13 * max(1.0, abs(c)):
            return c
        prev = c
        q *= 2
    return prev


def _polish(f, box, mult, tol, measure) -> LocatedZero:
    if mult > 1:
        z = _cluster_centroid(f, box, mult)
        res = measure(z)
        return LocatedZero(z, float(res), 0, int(mult), bool(box.contains(z) and res <= tol * 1.0000001))
    # Newton on raw f; the accepted residual is judged with ``measure``.
    z = complex(box.center)
    fz = abs(complex(f(z)))
    raw_tol = tol
    zc = measure(z)
    if zc > 0 and fz > 0:
        raw_tol = tol * fz / zc
    z, _, iters, ok = newton_refine(f, z, raw_tol, multiplicity=mult, return_info=True)
    res = measure(z)
    return LocatedZero(complex(z), float(res), int(iters), int(mult), bool(ok and res <= tol * 1.0000001))


def _merge(zeros: Sequence[LocatedZero], tol: float) -> list[LocatedZero]:
    out: list[LocatedZero] = []
    for zr in sorted(zeros, key=lambda r: (round(r.z.real, 12), round(r.z.imag, 12))):
        dup = next((o for o in out if abs(o.z - zr.z) <= max(10 * tol, 1e-10 * max(1.0, abs(zr.z)))), None)
        if dup is None:
            out.append(zr)
    return out
