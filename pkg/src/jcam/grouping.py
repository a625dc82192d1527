"""AP mode vectors and per-AP strong/weak target sets.

Each AP splits its targets (downlink users ``D``, jammed untrusted receivers
``J``, observed untrusted transmitters ``O``) into a strong set served by
partial zero-forcing and a weak set served by maximum ratio.  Sets are stored
as boolean masks; an AP only carries the roles of its current mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .scenario import LargeScaleState


@dataclass(frozen=True)
class ModeAssignment:
    """``a[m] = 1`` for downlink mode, ``0`` for monitoring mode."""

    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a)
        if a.ndim != 1 or not np.isin(a, (0, 1)).all():
            raise ValueError("mode vector must be a 1-D array of zeros and ones")
        object.__setattr__(self, "a", a.astype(np.int8))

    @classmethod
    def all_downlink(cls, M: int) -> "ModeAssignment":
        return cls(np.ones(M, dtype=np.int8))

    @classmethod
    def from_monitoring(cls, M: int, monitoring) -> "ModeAssignment":
        a = np.ones(M, dtype=np.int8)
        a[list(monitoring)] = 0
        return cls(a)

    @property
    def downlink(self) -> np.ndarray:
        return np.flatnonzero(self.a == 1)

    @property
    def monitoring(self) -> np.ndarray:
        return np.flatnonzero(self.a == 0)

    def __len__(self):
        return len(self.a)


def classify_strong_weak(betas, threshold: float, cap: int) -> tuple[np.ndarray, np.ndarray]:
    """Split indices by their share of the total gain.

    Index ``l`` is strong when ``betas[l] / sum(betas) >= threshold``; at most
    ``cap`` strong indices are kept (largest first, lower index on ties).
    Returns sorted index arrays ``(strong, weak)``.
    """
    betas = np.asarray(betas, dtype=float)
    mask = strong_mask(betas[None, :], threshold, cap)[0]
    return np.flatnonzero(mask), np.flatnonzero(~mask)


def strong_mask(betas: np.ndarray, threshold: float, cap: int) -> np.ndarray:
    """Row-wise version of :func:`classify_strong_weak` returning a boolean mask."""
    betas = np.asarray(betas, dtype=float)
    total = betas.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        share = np.where(total > 0, betas / np.where(total > 0, total, 1.0), 0.0)
    mask = (share >= threshold) & (total > 0)
    over = np.flatnonzero(mask.sum(axis=1) > cap)
    for m in over:
        # stable sort on -share keeps the lower index first among ties
        order = np.argsort(-share[m], kind="stable")
        mask[m] = False
        mask[m, order[:cap]] = True
    return mask


@dataclass(frozen=True)
class RoleMasks:
    """Strong-set masks every AP would use in each role, independent of mode."""

    D: np.ndarray  # (M, K)
    J: np.ndarray  # (M, U)
    O: np.ndarray  # (M, U)


def role_masks(ls: LargeScaleState, config: SystemConfig) -> RoleMasks:
    cap = config.N - 1
    th = config.grouping_threshold
    return RoleMasks(
        D=strong_mask(ls.beta_dl, th, cap),
        J=strong_mask(ls.beta_jam, th, cap),
        O=strong_mask(ls.beta_obs, th, cap),
    )


@dataclass(frozen=True)
class GroupingState:
    a: np.ndarray
    S_D: np.ndarray  # (M, K); rows of monitoring APs are all False
    W_D: np.ndarray
    S_J: np.ndarray  # (M, U)
    W_J: np.ndarray
    S_O: np.ndarray  # (M, U); rows of downlink APs are all False
    W_O: np.ndarray

    @property
    def Z_D(self) -> list[np.ndarray]:
        return [np.flatnonzero(c) for c in self.S_D.T]

    @property
    def Zbar_D(self) -> list[np.ndarray]:
        return [np.flatnonzero(c) for c in self.W_D.T]

    @property
    def Z_J(self) -> list[np.ndarray]:
        return [np.flatnonzero(c) for c in self.S_J.T]

    @property
    def Zbar_J(self) -> list[np.ndarray]:
        return [np.flatnonzero(c) for c in self.W_J.T]

    @property
    def Z_O(self) -> list[np.ndarray]:
        return [np.flatnonzero(c) for c in self.S_O.T]

    @property
    def Zbar_O(self) -> list[np.ndarray]:
        return [np.flatnonzero(c) for c in self.W_O.T]

    @property
    def n_strong_D(self) -> np.ndarray:
        return self.S_D.sum(axis=1)

    @property
    def n_strong_J(self) -> np.ndarray:
        return self.S_J.sum(axis=1)

    @property
    def n_strong_O(self) -> np.ndarray:
        return self.S_O.sum(axis=1)


def groups_from_masks(masks: RoleMasks, a: ModeAssignment | np.ndarray) -> GroupingState:
    a = np.asarray(getattr(a, "a", a))
    dl = (a == 1)[:, None]
    mo = (a == 0)[:, None]
    return GroupingState(
        a=a.astype(np.int8),
        S_D=masks.D & dl,
        W_D=~masks.D & dl,
        S_J=masks.J & dl,
        W_J=~masks.J & dl,
        S_O=masks.O & mo,
        W_O=~masks.O & mo,
    )


def build_groups(ls: LargeScaleState, a: ModeAssignment, config: SystemConfig) -> GroupingState:
    """Strong/weak sets for every AP in its current mode, cap ``N - 1``."""
    return groups_from_masks(role_masks(ls, config), a)
