"""Piecewise flat Ricci flow of edge lengths on block triangulations.

Every edge evolves by the Ricci curvature along itself,

    d|l|/dt = -Rc_l |l|,

integrated with an explicit Euler step.  Flat configurations are stationary
points; the interest is in how perturbations of a flat lattice grow or decay.

Face-diagonal perturbations of the cubic lattice are exponentially unstable
under the plain flow.  The stabilised variant restores every block to a flat
interior before each step by solving the length of each body diagonal so
that its deficit angle vanishes; a body deficit depends only on the 19 edges
of its own block, so the solves are independent across blocks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .curvature import curvature_field
from .simplex_geometry import deficit_angles

__all__ = [
    "FlowSingularError",
    "FlowTrace",
    "flatten_body_diagonals",
    "flow_rhs",
    "load_trace",
    "run_flow",
]


class FlowSingularError(RuntimeError):
    """The flow or the flattening solve ran into a degenerate configuration."""


def flow_rhs(tri, lengths):
    """Time derivative of every edge length, shape (n_edges,)."""
    cf = curvature_field(tri, lengths)
    return -cf.edge_ricci * cf.lengths


def _body_deficits(tri, lengths):
    return deficit_angles(tri, lengths)[tri.body_diagonal_slice]


def flatten_body_diagonals(tri, lengths, method="newton", h_rel=1e-6,
                           tol=1e-13, max_iter=12, blocks=None):
    """Adjust body-diagonal lengths so every block deficit vanishes.

    ``method='linear'`` takes a single Newton step (first order in the
    perturbation); ``'newton'`` iterates until every body deficit is below
    ``tol``.  Derivatives are central differences with step ``h_rel`` times
    the current diagonal.  Blocks are independent, so all solves run at
    once; pass ``blocks`` to restrict the solve to a subset.

    Returns a new length array; the input is not modified.
    """
    if method not in ("newton", "linear"):
        raise ValueError(f"unknown flattening method {method!r}")
    L = np.array(lengths, dtype=float)
    sl = tri.body_diagonal_slice
    sel = slice(None) if blocks is None else np.asarray(blocks, dtype=int)

    for iteration in range(max_iter):
        eps = _body_deficits(tri, L)[sel]
        if method == "newton" and np.abs(eps).max() < tol:
            return L
        body = L[sl][sel]
        h = h_rel * body
        Lp = L.copy()
        Lp[sl][sel] = body + h
        Lm = L.copy()
        Lm[sl][sel] = body - h
        deriv = (_body_deficits(tri, Lp)[sel] - _body_deficits(tri, Lm)[sel]) / (2.0 * h)
        if np.abs(deriv).min() < 1e-10:
            raise FlowSingularError(
                "body deficit insensitive to its diagonal; flattening is singular")
        update = body - eps / deriv
        if np.any(update <= 0.0):
            raise FlowSingularError("flattening drove a body diagonal nonpositive")
        L[sl][sel] = update
        if method == "linear":
            return L

    eps = _body_deficits(tri, L)[sel]
    if np.abs(eps).max() >= tol:
        raise FlowSingularError(
            f"flattening did not converge in {max_iter} iterations "
            f"(residual {np.abs(eps).max():.3e})")
    return L


@dataclass
class FlowTrace:
    """Recorded evolution of one flow run.

    ``lengths[s]`` is the configuration at ``times[s]`` (after flattening,
    when enabled) and ``rates[s]`` the flow right-hand side there, so the
    body-diagonal rates are reported even in stabilised runs where they are
    never integrated.
    """

    times: np.ndarray          # (n_samples,)
    lengths: np.ndarray        # (n_samples, n_edges)
    rates: np.ndarray          # (n_samples, n_edges)
    flat_lengths: np.ndarray   # (n_edges,) unperturbed reference
    mode: str                  # 'raw' or 'flattened'
    dt: float
    sigma: float
    seed: int
    normalize: bool
    record_every: int = 1
    flatten_residuals: np.ndarray | None = None  # max |body deficit| per sample
    metadata: dict = field(default_factory=dict)

    def deviations(self):
        """Length deviations from the flat reference, (n_samples, n_edges)."""
        return self.lengths - self.flat_lengths[None, :]

    def step_numbers(self):
        """Euler step index of each recorded sample."""
        return np.arange(len(self.times)) * self.record_every

    def edge_roles(self):
        """Role name of every edge column, derived from the role-major layout."""
        from .lattice import EdgeRole

        n = self.lengths.shape[1] // 7
        return [EdgeRole(e // n).name.lower() for e in range(self.lengths.shape[1])]

    def to_json(self):
        out = {
            "mode": self.mode,
            "dt": self.dt,
            "sigma": self.sigma,
            "seed": self.seed,
            "normalize": self.normalize,
            "record_every": self.record_every,
            "times": self.times.tolist(),
            "lengths": self.lengths.tolist(),
            "rates": self.rates.tolist(),
            "flat_lengths": self.flat_lengths.tolist(),
            "metadata": self.metadata,
        }
        if self.flatten_residuals is not None:
            out["flatten_residuals"] = self.flatten_residuals.tolist()
        return out

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    def save_csv(self, path):
        """Long table: one row per (sample, edge).

        Columns: step, time, edge, role, length, deviation, rate.
        """
        import csv

        roles = self.edge_roles()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["step", "time", "edge", "role", "length", "deviation", "rate"])
            for s, (k, t) in enumerate(zip(self.step_numbers(), self.times)):
                for e, role in enumerate(roles):
                    length = self.lengths[s, e]
                    writer.writerow([
                        int(k), repr(float(t)), e, role, repr(float(length)),
                        repr(float(length - self.flat_lengths[e])),
                        repr(float(self.rates[s, e])),
                    ])


def load_trace(path):
    """Rebuild a :class:`FlowTrace` from a ``save_json`` file."""
    with open(path) as fh:
        data = json.load(fh)
    residuals = data.get("flatten_residuals")
    return FlowTrace(
        times=np.asarray(data["times"], dtype=float),
        lengths=np.asarray(data["lengths"], dtype=float),
        rates=np.asarray(data["rates"], dtype=float),
        flat_lengths=np.asarray(data["flat_lengths"], dtype=float),
        mode=data["mode"],
        dt=data["dt"],
        sigma=data["sigma"],
        seed=data["seed"],
        normalize=data["normalize"],
        record_every=data.get("record_every", 1),
        flatten_residuals=None if residuals is None
        else np.asarray(residuals, dtype=float),
        metadata=data.get("metadata", {}),
    )


def run_flow(tri, lengths0=None, *, c=1.0, steps=100, dt=0.01, sigma=1e-15,
             seed=0, mode="raw", normalize=False, flatten_method="linear",
             record_every=1):
    """Integrate the flow and record every ``record_every``-th step.

    Starts from ``lengths0`` (default: the flat lattice at scale ``c``) plus
    a seeded normal perturbation of size ``sigma`` on every edge.  In
    ``'flattened'`` mode the body diagonals are re-solved to flatness before
    each sample and step; the default single linear solve always applies,
    which matters for perturbations below the Newton convergence tolerance.
    With ``normalize=True`` each Euler step is followed by a global
    rescaling pinning the total volume.

    ``record_every`` controls the sampling grid only — the explicit Euler
    step size stays ``dt`` — so a run can integrate finely while recording
    on a coarser grid of times ``k * record_every * dt``.  ``steps`` must be
    a multiple of ``record_every`` so the final state is always recorded.
    """
    from .lattice import flat_lengths as _flat
    from .simplex_geometry import tet_edge_lengths, tet_volumes

    if mode not in ("raw", "flattened"):
        raise ValueError(f"unknown flow mode {mode!r}")
    record_every = int(record_every)
    if record_every < 1:
        raise ValueError("record_every must be a positive integer")
    if steps % record_every:
        raise ValueError("steps must be a multiple of record_every")
    flat = _flat(tri, c)
    dev = np.zeros_like(flat) if lengths0 is None \
        else np.asarray(lengths0, dtype=float) - flat
    if sigma:
        rng = np.random.default_rng(seed)
        dev = dev + sigma * rng.standard_normal(flat.shape)
    if np.any(flat + dev <= 0.0):
        raise FlowSingularError("nonpositive edge length at step 0")

    # The deviation from flat is the integrated state: increments far below
    # one ulp of the edge lengths still accumulate instead of rounding away,
    # which matters for perturbations at the precision floor.
    volume0 = tet_volumes(tet_edge_lengths(tri, flat + dev)).sum()
    n_samples = steps // record_every + 1
    times = np.empty(n_samples)
    samples = np.empty((n_samples, tri.n_edges))
    rates = np.empty((n_samples, tri.n_edges))
    residuals = np.empty(n_samples) if mode == "flattened" else None

    rec = 0
    for s in range(steps + 1):
        L = flat + dev
        if mode == "flattened":
            L = flatten_body_diagonals(tri, L, method=flatten_method)
            dev = L - flat
        if np.any(L <= 0.0):
            raise FlowSingularError(f"nonpositive edge length at step {s}")
        rhs = flow_rhs(tri, L)
        if s % record_every == 0:
            times[rec] = s * dt
            samples[rec] = L
            rates[rec] = rhs
            if residuals is not None:
                residuals[rec] = np.abs(_body_deficits(tri, L)).max()
            rec += 1
        if s == steps:
            break
        dev = dev + dt * rhs
        if normalize:
            volume = tet_volumes(tet_edge_lengths(tri, flat + dev)).sum()
            scale = (volume0 / volume) ** (1.0 / 3.0)
            dev = (scale - 1.0) * flat + scale * dev

    return FlowTrace(
        times=times,
        lengths=samples,
        rates=rates,
        flat_lengths=flat,
        mode=mode,
        dt=dt,
        sigma=sigma,
        seed=seed,
        normalize=normalize,
        record_every=record_every,
        flatten_residuals=residuals,
        metadata={"kind": tri.template.kind.value, "dims": list(tri.dims),
                  "c": c, "steps": steps},
    )
