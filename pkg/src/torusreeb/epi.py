"""The two epimorphisms on concrete grid data.

krot reads the uniform cyclic shift a function-preserving diffeomorphism
induces on the family of orbit curves (image curves matched by Hausdorff
distance).  eval tracks the continuous lift of the curve family through an
isotopy: with the n curves spaced 1/n apart in x, the index coordinate is n
times the accumulated mean x-displacement of curve 0, and the terminal value
is the integer deck displacement.  By construction krot of the terminal
frame equals eval mod n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DiscontinuousLift, NonUniformShift, NotCurvePreserving, TopologyError
from .modeldiffeo import GridDiffeo, Isotopy, _wrap_half

__all__ = ["CoverLift", "krot", "eval_isotopy", "eval_lift", "epi_report"]


@dataclass
class CoverLift:
    n: int
    trajectory: list[float]  # continuous curve-index coordinate per frame
    displacement: int


def _curve_points(curve) -> np.ndarray:
    pts = getattr(curve, "points", curve)
    return np.asarray(pts, dtype=float)


def _torus_directed_hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    # max over a of min over b, in the max-metric on the torus
    diff = _wrap_half(a[:, None, :] - b[None, :, :])
    d = np.abs(diff).max(axis=2)
    return float(d.min(axis=1).max())


def _torus_hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    return max(_torus_directed_hausdorff(a, b), _torus_directed_hausdorff(b, a))


def krot(h: GridDiffeo, orbit_curves) -> int:
    """The uniform index shift of the orbit curves: h(C_i) = C_{i + krot}.

    Raises NotCurvePreserving when an image matches no orbit curve within
    2/N, and NonUniformShift when the shift differs between curves.
    """
    n = len(orbit_curves)
    if n == 0:
        raise ValueError("empty orbit curve family")
    tol = 2.0 / h.n
    points = [_curve_points(c) for c in orbit_curves]
    shifts = []
    for i, pts in enumerate(points):
        img = h.apply(pts)
        dists = [_torus_hausdorff(img, q) for q in points]
        j = int(np.argmin(dists))
        if dists[j] > tol:
            raise NotCurvePreserving(
                f"image of curve {i} is {dists[j]:.3e} from the nearest orbit "
                f"curve (tolerance {tol:.3e})"
            )
        shifts.append((j - i) % n)
    if len(set(shifts)) != 1:
        raise NonUniformShift(f"index shifts {shifts} are not uniform")
    return shifts[0]


def eval_lift(omega: Isotopy, orbit_curves) -> CoverLift:
    """Lift of curve 0 through the isotopy; terminal integer displacement.

    Per-frame x-increments above half an index unit (1/(2n) in x) break the
    unique lifting and raise DiscontinuousLift.  The terminal frame must
    preserve the curve family (krot is evaluated on it).
    """
    n = len(orbit_curves)
    if n == 0:
        raise ValueError("empty orbit curve family")
    pts = _curve_points(orbit_curves[0])
    threshold = 1.0 / (2.0 * n)
    prev = pts
    x_accum = 0.0
    trajectory = [0.0]
    for frame in omega.frames[1:]:
        img = frame.apply(pts)
        inc = _wrap_half(img[:, 0] - prev[:, 0])
        if np.abs(inc).max() >= threshold:
            raise DiscontinuousLift(
                f"frame increment {np.abs(inc).max():.3f} exceeds half an "
                f"index unit {threshold:.3f}"
            )
        x_accum += float(inc.mean())
        trajectory.append(n * x_accum)
        prev = img
    krot(omega.terminal, orbit_curves)  # NotCurvePreserving propagates
    displacement = round(trajectory[-1])
    if abs(trajectory[-1] - displacement) > 0.05:
        raise TopologyError(
            f"terminal lift {trajectory[-1]:.4f} is not an integer index"
        )
    return CoverLift(n=n, trajectory=trajectory, displacement=displacement)


def eval_isotopy(omega: Isotopy, orbit_curves) -> int:
    """The deck displacement of the lifted curve family (an integer)."""
    return eval_lift(omega, orbit_curves).displacement


def epi_report(omega: Isotopy, orbit_curves) -> dict:
    lift = eval_lift(omega, orbit_curves)
    return {
        "schema": 1,
        "krot": krot(omega.terminal, orbit_curves),
        "eval": lift.displacement,
        "frames": len(omega.frames),
        "trajectory": lift.trajectory,
    }
