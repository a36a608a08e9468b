"""Two-stage convergence detection and post-convergence tracking.

Stage one waits for one orientation hypothesis to dominate: at least a
fixed share of particles carrying the same label (or, for unlabeled
baselines, the cloud contracting below a dispersion threshold).  Stage two
runs flat-kernel mean shift over the dominant subset and fires when the
largest cluster holds at least half of it; its mode is the position fix.
Both stages can latch on the same step.

Afterwards the member set of that cluster is followed: the prediction is
the members' mean position, refreshed by a full re-clustering every
``cluster_update_period`` steps so resampling churn cannot drag it away.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ops
from .filter import ParticleSet

PHASE_SEARCHING = "searching"
PHASE_LABEL_DOMINANT = "label_dominant"
PHASE_CONVERGED = "converged"


@dataclass(frozen=True)
class ConvergenceParams:
    label_dominance: float = 0.80
    cluster_dominance: float = 0.50
    meanshift_bandwidth: float = 1.0
    meanshift_tol: float = 0.01
    meanshift_max_iter: int = 100
    cluster_update_period: int = 20
    uniform_dispersion_threshold: float = 5.0


def dispersion(particles: ParticleSet) -> float:
    """RMS distance of the cloud from its centroid, in meters."""
    dx = particles.x - particles.x.mean()
    dy = particles.y - particles.y.mean()
    return float(np.sqrt(np.mean(dx * dx + dy * dy)))


def check_step1(
    particles: ParticleSet, params: ConvergenceParams
) -> tuple[bool, int | None]:
    """Whether one label holds at least the dominance share of all particles.

    Ties at exactly the threshold resolve to the lowest label index.
    """
    labeled = particles.label[particles.label >= 0]
    if labeled.size == 0:
        return False, None
    counts = np.bincount(labeled)
    k = int(np.argmax(counts))
    if counts[k] >= params.label_dominance * particles.n:
        return True, k
    return False, None


def check_step1_dispersion(particles: ParticleSet, params: ConvergenceParams) -> bool:
    """Stage-one test for unlabeled clouds: has the cloud contracted?"""
    return dispersion(particles) <= params.uniform_dispersion_threshold


def mean_shift(
    points: np.ndarray,
    bandwidth: float,
    tol: float = 0.01,
    max_iter: int = 100,
) -> tuple[np.ndarray, np.ndarray]:
    """Flat-kernel mean-shift clustering of 2-d points.

    Every point is iterated to its mode; modes closer than bandwidth/2 to
    an already-accepted one merge into that cluster (first come, first
    kept, in point order).  Returns (per-point cluster ids, cluster mode
    positions).
    """
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros((0, 2))
    modes = ops.mean_shift_modes(pts, bandwidth, tol, max_iter)
    merge_r2 = (0.5 * bandwidth) ** 2
    centers: list[np.ndarray] = []
    ids = np.empty(n, dtype=np.int64)
    for i in range(n):
        m = modes[i]
        assigned = -1
        for c, ctr in enumerate(centers):
            d = m - ctr
            if d[0] * d[0] + d[1] * d[1] <= merge_r2:
                assigned = c
                break
        if assigned < 0:
            centers.append(m)
            assigned = len(centers) - 1
        ids[i] = assigned
    return ids, np.vstack(centers)


def dominant_share(particles: ParticleSet) -> tuple[int | None, float]:
    """Most common label and its share of all particles (None if unlabeled)."""
    labeled = particles.label[particles.label >= 0]
    if labeled.size == 0:
        return None, 0.0
    counts = np.bincount(labeled)
    k = int(np.argmax(counts))
    return k, counts[k] / particles.n


def largest_cluster(
    particles: ParticleSet,
    dominant_label: int | None,
    params: ConvergenceParams,
) -> tuple[np.ndarray | None, np.ndarray | None, float]:
    """Mean-shift the dominant subset (all particles when label is None).

    Returns (mode position, member particle indices, share of the subset
    in that cluster).  Ties break toward the earliest cluster.
    """
    if dominant_label is None:
        subset = np.arange(particles.n)
    else:
        subset = np.nonzero(particles.label == dominant_label)[0]
    if subset.size == 0:
        return None, None, 0.0
    pts = np.column_stack((particles.x[subset], particles.y[subset]))
    ids, centers = mean_shift(
        pts,
        params.meanshift_bandwidth,
        params.meanshift_tol,
        params.meanshift_max_iter,
    )
    sizes = np.bincount(ids)
    best = int(np.argmax(sizes))
    members = subset[ids == best]
    return centers[best], members, sizes[best] / subset.size


def check_step2(
    particles: ParticleSet,
    dominant_label: int | None,
    params: ConvergenceParams,
) -> tuple[bool, np.ndarray | None]:
    """Stage-two test: largest cluster holds the dominance share of the
    dominant-label subset.  Returns (converged, mode position)."""
    center, members, share = largest_cluster(particles, dominant_label, params)
    if members is not None and share >= params.cluster_dominance:
        return True, center
    return False, None


@dataclass
class ConvergenceState:
    phase: str = PHASE_SEARCHING
    t1: float | None = None
    t2: float | None = None
    dominant_label: int | None = None
    dominant_cluster_center: np.ndarray | None = None
    members: np.ndarray | None = None
    steps_since_cluster_update: int = 0


def update_tracking(
    state: ConvergenceState, particles: ParticleSet, params: ConvergenceParams
) -> tuple[ConvergenceState, np.ndarray | None]:
    """One converged-phase update; returns (state, predicted position).

    Between refreshes the prediction is the mean position of the tracked
    member indices (particle count never changes, so indices stay valid);
    every ``cluster_update_period`` steps the dominant cluster is found
    afresh and its membership adopted.
    """
    state.steps_since_cluster_update += 1
    if state.steps_since_cluster_update >= params.cluster_update_period:
        center, members, _ = largest_cluster(
            particles, state.dominant_label, params
        )
        if members is not None and members.size:
            state.dominant_cluster_center = center
            state.members = members
        state.steps_since_cluster_update = 0
    else:
        state.dominant_cluster_center = np.array(
            [
                particles.x[state.members].mean(),
                particles.y[state.members].mean(),
            ]
        )
    return state, state.dominant_cluster_center


@dataclass
class ConvergenceTracker:
    """Drives the two stages over a particle stream and then tracks.

    ``unlabeled`` switches stage one to the dispersion test (for seeding
    strategies whose particles carry no orientation labels).
    """

    params: ConvergenceParams
    unlabeled: bool = False
    state: ConvergenceState = field(default_factory=ConvergenceState)

    def observe(self, t: float, particles: ParticleSet) -> np.ndarray | None:
        """Feed one post-update particle set; position fix once converged."""
        st = self.state
        if st.phase == PHASE_SEARCHING:
            if self.unlabeled:
                ok, k = check_step1_dispersion(particles, self.params), None
            else:
                ok, k = check_step1(particles, self.params)
            if ok:
                st.phase = PHASE_LABEL_DOMINANT
                st.t1 = t
                st.dominant_label = k
            else:
                return None

        if st.phase == PHASE_LABEL_DOMINANT:
            center, members, share = largest_cluster(
                particles, st.dominant_label, self.params
            )
            if members is not None and share >= self.params.cluster_dominance:
                st.phase = PHASE_CONVERGED
                st.t2 = t
                st.dominant_cluster_center = center
                st.members = members
                st.steps_since_cluster_update = 0
                return center
            return None

        _, pred = update_tracking(st, particles, self.params)
        return pred
