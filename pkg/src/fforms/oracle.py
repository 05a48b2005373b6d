"""Exact brute-force reference on small discrete joint distributions.

A :class:`DiscreteJoint` stores an explicit probability tensor over a
small per-step support grid.  Event probabilities, survival curves and
window-sum distributions are computed by full enumeration, giving an
assumption-free oracle against which every Monte Carlo estimator in
:mod:`fforms.tasks` is validated.  The enumeration code here is written
independently of the vectorized estimators on purpose: the two routes
must be able to catch each other's bugs.
"""

from __future__ import annotations

import itertools
import json
from importlib import resources

import numpy as np

from fforms.core import HorizonMeta, TrajectoryEnsemble
from fforms.errors import InputError
from fforms.tasks import EventSpec, SurvivalCurve

MAX_HORIZON = 4
MAX_SUPPORT = 8


class DiscreteJoint:
    """Joint distribution over per-step finite supports (h <= 4, <= 8 values
    per step).  ``prob[i1, ..., ih]`` is the probability of the path
    ``(support[0][i1], ..., support[h-1][ih])``."""

    def __init__(self, support, prob, name: str | None = None):
        self.support = tuple(np.asarray(s, dtype=float) for s in support)
        self.h = len(self.support)
        if not 1 <= self.h <= MAX_HORIZON:
            raise InputError(f"horizon must lie in 1..{MAX_HORIZON}, got {self.h}")
        shape = tuple(s.size for s in self.support)
        for k, s in enumerate(self.support):
            if s.size < 1 or s.size > MAX_SUPPORT:
                raise InputError(f"step {k}: support size must lie in 1..{MAX_SUPPORT}")
            if np.any(np.diff(s) <= 0.0):
                raise InputError(f"step {k}: support values must be strictly ascending")
        self.prob = np.asarray(prob, dtype=float).reshape(shape)
        if np.any(self.prob < -1e-15):
            raise InputError("probabilities must be non-negative")
        total = float(np.sum(self.prob))
        if abs(total - 1.0) > 1e-12:
            raise InputError(f"probabilities sum to {total!r}, expected 1 within 1e-12")
        self.name = name
        for arr in self.support:
            arr.flags.writeable = False
        self.prob.flags.writeable = False

    def atoms(self):
        """Yield (path values tuple, probability) over all support points."""
        for idx in itertools.product(*(range(s.size) for s in self.support)):
            p = float(self.prob[idx])
            yield tuple(float(self.support[k][i]) for k, i in enumerate(idx)), p

    def __repr__(self):
        sizes = "x".join(str(s.size) for s in self.support)
        return f"DiscreteJoint(h={self.h}, support={sizes}, name={self.name!r})"


def marginalize(joint: DiscreteJoint, step: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact marginal of 1-based ``step``: (values, probabilities)."""
    if not 1 <= step <= joint.h:
        raise InputError(f"step must lie in 1..{joint.h}")
    axes = tuple(a for a in range(joint.h) if a != step - 1)
    probs = np.sum(joint.prob, axis=axes) if axes else joint.prob.copy()
    return joint.support[step - 1].copy(), np.asarray(probs, dtype=float)


def enumerate_event_probability(joint: DiscreteJoint, event: EventSpec) -> float:
    """Exact probability of the event by summing over all atoms."""
    event.check_horizon(joint.h)
    total = 0.0
    for path, p in joint.atoms():
        if p == 0.0:
            continue
        if _event_holds(path, event):
            total += p
    return total


def _event_holds(path: tuple[float, ...], event: EventSpec) -> bool:
    vals = [path[i - 1] for i in event.window]
    if event.functional == "first_crossing":
        if event.comparator == ">=":
            return any(v >= event.threshold for v in vals)
        return any(v <= event.threshold for v in vals)
    if event.functional == "sum":
        g = sum(vals)
    elif event.functional == "max":
        g = max(vals)
    else:
        g = min(vals)
    return g >= event.threshold if event.comparator == ">=" else g <= event.threshold


def exact_survival(joint: DiscreteJoint, threshold: float, direction: str) -> SurvivalCurve:
    """Exact first-crossing survival curve by path enumeration."""
    if direction not in (">=", "<="):
        raise InputError(f"direction must be '>=' or '<=', got {direction!r}")
    pmf = [0.0] * joint.h
    censored = 0.0
    for path, p in joint.atoms():
        if p == 0.0:
            continue
        tau = None
        for k, v in enumerate(path):
            crossed = v >= threshold if direction == ">=" else v <= threshold
            if crossed:
                tau = k
                break
        if tau is None:
            censored += p
        else:
            pmf[tau] += p
    survival = []
    remaining = 1.0
    for k in range(joint.h):
        remaining -= pmf[k]
        survival.append(max(remaining, 0.0))
    return SurvivalCurve(
        survival=np.asarray(survival),
        provenance={"task": "threshold_crossing", "source": "oracle",
                    "threshold": threshold, "direction": direction},
    )


def exact_aggregate(joint: DiscreteJoint, window) -> tuple[np.ndarray, np.ndarray]:
    """Exact distribution of the window sum: (values, probabilities).

    Sum values closer than 1e-9 are consolidated to absorb float noise.
    """
    win = tuple(int(i) for i in window)
    if not win or any(i < 1 or i > joint.h for i in win):
        raise InputError(f"window must be non-empty with indices in 1..{joint.h}")
    sums: list[float] = []
    masses: list[float] = []
    for path, p in joint.atoms():
        if p == 0.0:
            continue
        z = sum(path[i - 1] for i in win)
        sums.append(z)
        masses.append(p)
    order = np.argsort(sums, kind="stable")
    values: list[float] = []
    probs: list[float] = []
    for i in order:
        if values and abs(sums[i] - values[-1]) <= 1e-9:
            probs[-1] += masses[i]
        else:
            values.append(sums[i])
            probs.append(masses[i])
    return np.asarray(values), np.asarray(probs)


def sample(joint: DiscreteJoint, n_paths: int, seed: int) -> TrajectoryEnsemble:
    """I.i.d. draws from the joint by inverse CDF on the flattened atoms."""
    if n_paths < 1:
        raise InputError("need at least one path")
    flat = joint.prob.reshape(-1)
    cum = np.cumsum(flat)
    cum = cum / cum[-1]
    rng = np.random.default_rng(seed)
    idx = np.searchsorted(cum, rng.random(n_paths), side="right")
    idx = np.minimum(idx, flat.size - 1)
    unraveled = np.unravel_index(idx, joint.prob.shape)
    paths = np.column_stack([
        joint.support[k][unraveled[k]] for k in range(joint.h)
    ])
    meta = HorizonMeta(origin=0, horizon=joint.h)
    return TrajectoryEnsemble(meta=meta, paths=paths)


# ---------------------------------------------------------------------------
# JSON interchange and the bundled corpus
# ---------------------------------------------------------------------------

def joint_to_json(joint: DiscreteJoint) -> dict:
    out = {
        "support": [s.tolist() for s in joint.support],
        "prob": joint.prob.reshape(-1).tolist(),
    }
    if joint.name:
        out["name"] = joint.name
    return out


def joint_from_json(data: dict) -> DiscreteJoint:
    if "support" not in data or "prob" not in data:
        raise InputError("discrete joint JSON needs 'support' and 'prob' keys")
    return DiscreteJoint(
        support=data["support"], prob=data["prob"], name=data.get("name")
    )


def load_corpus() -> list[DiscreteJoint]:
    """The bundled instance corpus, including identical-marginal pairs."""
    joints = []
    root = resources.files("fforms").joinpath("corpus")
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            joints.append(joint_from_json(json.loads(entry.read_text())))
    if not joints:
        raise InputError("bundled corpus is missing")
    return joints
