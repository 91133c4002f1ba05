"""Hyperplane-arrangement cell enumeration and the fixed-parameter solver.

Cells are the full-dimensional open regions cut out of R^d by a set of
hyperplanes; each cell is identified by its sign label (bit j = 1 means the
closed side a_j . x >= b_j).  Enumeration is incremental: hyperplanes are
added one at a time and every existing cell either splits or has its label
extended, so at most sum_{i<=d} C(m, i) cells ever exist.

Labels are filtered against the belief simplex only weakly (closed-cell
intersection): over-inclusion is sound because the restricted persuasion LP
rejects spurious signals itself.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import CapExceededError, DegenerateInstanceError, SolverError
from .exact import solve_restricted_persuasive
from .lp import solve_small_dense
from .model import PersuasionInstance, PublicScheme
from .profiles import ActionProfile

logger = logging.getLogger(__name__)

INTERIOR_TOL = 1e-8
DEGENERACY_RTOL = 1e-9
DUPLICATE_TOL = 1e-9
DEFAULT_LABEL_CAP = 100_000


@dataclass(frozen=True)
class Hyperplane:
    """a . x = b with a normalized to unit length."""

    normal: tuple[float, ...]
    offset: float

    def __post_init__(self):
        a = np.asarray(self.normal, dtype=float)
        norm = float(np.linalg.norm(a))
        if norm <= 1e-12:
            raise ValueError("hyperplane normal is (numerically) zero")
        object.__setattr__(self, "normal", tuple(a / norm))
        object.__setattr__(self, "offset", float(self.offset) / norm)

    @property
    def dim(self) -> int:
        return len(self.normal)

    def signed_distance(self, x: np.ndarray) -> float:
        return float(np.dot(self.normal, x) - self.offset)


@dataclass
class Cell:
    """One open cell: its sign label, an interior witness, and the witness
    margin (min distance to any bounding plane / box facet)."""

    label: tuple[int, ...]
    witness: np.ndarray
    margin: float


LinearConstraint = tuple[Sequence[float], str, float]  # coeffs, relation, rhs


def _split_extra(extra: Sequence[LinearConstraint], dim: int):
    """Extra weak constraints as dense <= / == blocks over (x, t)."""
    ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
    for coeffs, relation, rhs in extra:
        row = np.zeros(dim + 1)
        row[:dim] = np.asarray(coeffs, dtype=float)
        if relation == "<=":
            ub_rows.append(row)
            ub_rhs.append(float(rhs))
        elif relation == ">=":
            ub_rows.append(-row)
            ub_rhs.append(-float(rhs))
        elif relation == "==":
            eq_rows.append(row)
            eq_rhs.append(float(rhs))
        else:
            raise ValueError(f"unknown relation {relation!r}")
    return ub_rows, ub_rhs, eq_rows, eq_rhs


def _margin_probe(
    normals: np.ndarray,
    offsets: np.ndarray,
    label: Sequence[int],
    extra_blocks,
    box_radius: Optional[float],
) -> tuple[float, np.ndarray]:
    """max t s.t. every signed plane margin >= t, plus weak side constraints.

    Always feasible (t may go negative), always bounded (t <= 1), so any
    non-optimal status is a numerical failure.
    """
    dim = normals.shape[1] if len(normals) else len(offsets)
    k = len(label)
    signs = np.where(np.asarray(label[:k], dtype=float) > 0, 1.0, -1.0)
    # signed margin rows: -(sign*a).x + t <= -(sign*b)
    plane_rows = np.empty((k, dim + 1))
    plane_rows[:, :dim] = -signs[:, None] * normals[:k]
    plane_rows[:, dim] = 1.0
    plane_rhs = -signs * offsets[:k]

    ub_rows, ub_rhs, eq_rows, eq_rhs = extra_blocks
    A_ub = np.vstack([plane_rows] + ub_rows) if k or ub_rows else None
    b_ub = np.concatenate([plane_rhs, ub_rhs]) if k or ub_rhs else None
    A_eq = np.vstack(eq_rows) if eq_rows else None
    b_eq = np.asarray(eq_rhs) if eq_rows else None

    c = np.zeros(dim + 1)
    c[dim] = -1.0  # maximize t
    r = box_radius
    bounds = [(-r, r) if r is not None else (None, None)] * dim + [(None, 1.0)]
    status, x, fun = solve_small_dense(c, A_ub, b_ub, A_eq, b_eq, bounds)
    if status == "infeasible":
        # only the weak ambient constraints can be infeasible
        return -math.inf, np.zeros(dim)
    if status != "optimal":
        raise SolverError(f"interior LP ended with status {status}")
    return -fun, x[:dim]


def cell_has_interior(
    planes: Sequence[Hyperplane],
    label: Sequence[int],
    extra: Sequence[LinearConstraint] = (),
    box_radius: Optional[float] = 1.0,
    tol: float = INTERIOR_TOL,
) -> Optional[np.ndarray]:
    """Witness point strictly inside the labeled cell, or None.

    Maximizes the minimum signed margin over all planes inside a box (the
    compactifier for unbounded cells); the cell has interior iff the optimal
    margin exceeds `tol`.
    """
    if not planes:
        raise ValueError("need at least one hyperplane")
    dim = planes[0].dim
    normals = np.array([h.normal for h in planes])
    offsets = np.array([h.offset for h in planes])
    margin, x = _margin_probe(
        normals, offsets, label, _split_extra(extra, dim), box_radius
    )
    return x if margin > tol else None


def _auto_box_radius(planes: Sequence[Hyperplane]) -> float:
    """Box radius guaranteed to expose every cell of the arrangement.

    Every cell has interior points near the min-norm point of some flat of
    the arrangement (intersections of up to d planes), so the box must
    enclose all of those.  Near-parallel planes push flats far out; their
    contribution is capped so the LP scaling stays sane.
    """
    offsets = np.array([h.offset for h in planes])
    if not len(offsets) or np.abs(offsets).max() < 1e-12:
        return 10.0  # central arrangement: all flats pass through the origin
    normals = np.array([h.normal for h in planes])
    d = normals.shape[1]
    rho = float(np.abs(offsets).max())
    for k in range(2, d + 1):
        for sub in itertools.combinations(range(len(planes)), k):
            mat = normals[list(sub)]
            rhs = offsets[list(sub)]
            x = np.linalg.lstsq(mat, rhs, rcond=None)[0]
            if np.linalg.norm(mat @ x - rhs) <= 1e-9 * (1.0 + np.linalg.norm(rhs)):
                rho = max(rho, min(float(np.abs(x).max()), 1e6))
    return min(4.0 * rho + 10.0, 1e7)


def _dedup_planes(planes: Sequence[Hyperplane]) -> tuple[list[Hyperplane], list[int]]:
    """Collapse planes identical up to positive scaling; normals are unit."""
    reps: list[Hyperplane] = []
    rep_of: list[int] = []
    for h in planes:
        found = None
        for r, rep in enumerate(reps):
            if (
                abs(h.offset - rep.offset) <= DUPLICATE_TOL
                and max(abs(a - b) for a, b in zip(h.normal, rep.normal)) <= DUPLICATE_TOL
            ):
                found = r
                break
        if found is None:
            reps.append(h)
            rep_of.append(len(reps) - 1)
        else:
            rep_of.append(found)
    return reps, rep_of


def enumerate_cells(
    planes: Sequence[Hyperplane],
    box_radius: Optional[float] = None,
    extra: Sequence[LinearConstraint] = (),
    cap: int = DEFAULT_LABEL_CAP,
) -> list[Cell]:
    """All cells of the arrangement, labels in insertion order.

    Incremental: for each existing cell, test both sides of the incoming
    hyperplane; split the cell when both have interior, extend its label
    otherwise.  A cached witness and its margin ball let most non-splitting
    sides and many splits skip the feasibility LP entirely (the ball
    argument requires no equality constraints, so it is disabled when
    `extra` contains any).
    """
    if not planes:
        return []
    dim = planes[0].dim
    if any(h.dim != dim for h in planes):
        raise ValueError("hyperplanes have inconsistent dimensions")
    reps, rep_of = _dedup_planes(planes)

    if box_radius is None:
        box_radius = _auto_box_radius(reps)
    ball_ok = not extra

    rep_normals = np.array([h.normal for h in reps])
    rep_offsets = np.array([h.offset for h in reps])
    extra_blocks = _split_extra(extra, dim)

    def probe(label) -> Optional[Cell]:
        margin, x = _margin_probe(rep_normals, rep_offsets, label, extra_blocks, box_radius)
        if margin <= INTERIOR_TOL:
            return None
        return Cell(tuple(label), x, float(margin))

    if extra:
        seed = probe(())  # any interior point of the ambient region
        if seed is None:
            return []
        cells = [seed]
    else:
        start = np.zeros(dim)
        cells = [Cell(label=(), witness=start, margin=float(box_radius))]

    for h in reps:
        next_cells: list[Cell] = []
        for cell in cells:
            dist = h.signed_distance(cell.witness)

            if ball_ok and abs(dist) < cell.margin - INTERIOR_TOL:
                # the witness ball straddles the plane: both sides are cells
                # and shifted ball centers serve as their witnesses
                a = np.asarray(h.normal)
                m = cell.margin
                up = cell.witness + a * (m - dist) / 2.0
                dn = cell.witness - a * (m + dist) / 2.0
                next_cells.append(Cell(cell.label + (1,), up, (m + dist) / 2.0))
                next_cells.append(Cell(cell.label + (0,), dn, (m - dist) / 2.0))
                continue

            if abs(dist) > INTERIOR_TOL:
                # witness strictly on one side: that side needs no LP
                side = 1 if dist > 0 else 0
                kept = Cell(
                    cell.label + (side,), cell.witness, min(cell.margin, abs(dist))
                )
                other = probe(cell.label + (1 - side,))
                next_cells.append(kept)
                if other is not None:
                    next_cells.append(other)
            else:
                # witness (numerically) on the plane: probe both sides
                hi = probe(cell.label + (1,))
                lo = probe(cell.label + (0,))
                if hi is None and lo is None:
                    # razor-thin cell; keep the less bad side rather than
                    # lose the region
                    logger.warning("near-degenerate cell at label %s", cell.label)
                    side = 1 if dist >= 0 else 0
                    next_cells.append(
                        Cell(cell.label + (side,), cell.witness, 0.0)
                    )
                else:
                    next_cells.extend(c for c in (hi, lo) if c is not None)
        cells = next_cells
        if len(cells) > cap:
            raise CapExceededError(f"arrangement produced more than {cap} cells")

    # expand labels of collapsed duplicates back to the original plane order
    out = []
    for cell in cells:
        full = tuple(cell.label[rep_of[j]] for j in range(len(planes)))
        out.append(Cell(full, cell.witness, cell.margin))
    return out


def check_nondegeneracy(
    inst: PersuasionInstance, rtol: float = DEGENERACY_RTOL
) -> Optional[tuple[int, ...]]:
    """First subset of |states| receivers with dependent payoffs, else None."""
    d = inst.num_states
    payoff = np.asarray(inst.payoff)
    for subset in itertools.combinations(range(inst.n), d):
        block = payoff[list(subset), :]
        svals = np.linalg.svd(block, compute_uv=False)
        if svals[-1] <= rtol * svals[0]:
            return subset
    return None


def simplex_constraints(dim: int) -> list[LinearConstraint]:
    """p >= 0 componentwise and sum(p) = 1."""
    rows: list[LinearConstraint] = [
        (tuple(1.0 if j == i else 0.0 for j in range(dim)), ">=", 0.0) for i in range(dim)
    ]
    rows.append((tuple(1.0 for _ in range(dim)), "==", 1.0))
    return rows


def _closed_cell_meets_simplex(normals: np.ndarray, offsets: np.ndarray, label) -> bool:
    """Weak feasibility of the label's closed cell intersected with the
    belief simplex."""
    dim = normals.shape[1]
    signs = np.where(np.asarray(label, dtype=float) > 0, 1.0, -1.0)
    A_ub = -signs[:, None] * normals
    b_ub = -signs * offsets
    status, _, _ = solve_small_dense(
        np.zeros(dim),
        A_ub,
        b_ub,
        np.ones((1, dim)),
        np.ones(1),
        [(0.0, 1.0)] * dim,
    )
    return status == "optimal"


def fpt_label_bound(n: int, d: int) -> int:
    return sum(math.comb(n, i) for i in range(min(n, d) + 1))


def solve_fpt(
    inst: PersuasionInstance, label_cap: int = DEFAULT_LABEL_CAP
) -> tuple[PublicScheme, float]:
    """Optimal persuasive scheme through arrangement labels.

    Builds one zero-offset hyperplane per receiver (normal = the payoff
    vector), enumerates the cells of that arrangement, keeps the labels
    whose closed cell meets the belief simplex, and solves the persuasion LP
    restricted to those labels as the signal set.  Requires non-degenerate
    payoffs; bound Sum_{i<=d} C(n, i) on the candidate count.
    """
    bad = check_nondegeneracy(inst)
    if bad is not None:
        raise DegenerateInstanceError(bad)
    d = inst.num_states
    if fpt_label_bound(inst.n, d) > label_cap:
        raise CapExceededError(
            f"label bound {fpt_label_bound(inst.n, d)} exceeds cap {label_cap}"
        )

    planes = [Hyperplane(tuple(inst.payoff[i, :]), 0.0) for i in range(inst.n)]
    cells = enumerate_cells(planes, box_radius=1.0, cap=label_cap)
    normals = np.array([h.normal for h in planes])
    offsets = np.array([h.offset for h in planes])
    labels = [
        c.label for c in cells if _closed_cell_meets_simplex(normals, offsets, c.label)
    ]
    logger.debug("fpt: %d cells, %d meet the simplex", len(cells), len(labels))
    signals = [ActionProfile(lab) for lab in labels]
    return solve_restricted_persuasive(inst, signals, mode="exact")
