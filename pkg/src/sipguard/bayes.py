"""Two-level Bayesian tree: CPT message passing, fusion, and belief.

The root node holds the traffic classes; each leaf holds one observable.
Likelihood vectors travel upward (``likelihood_to_parent``), prior vectors
downward (``propagate_prior``), and the root belief is the normalized
elementwise product of prior and fused likelihood. Likelihood vectors are
meaningful up to positive scale, so raw counts are valid evidence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

TRAFFIC_CLASSES = (
    "NORMAL",
    "SCAN",
    "SPIT",
    "DOS",
    "PASSWORD_CRACKING",
    "FIREWALL_TRAVERSAL",
)

ROW_SUM_TOLERANCE = 1e-6


class ContradictoryEvidence(ValueError):
    """No class is consistent with the evidence (all-zero fused likelihood)."""


def cpt_row_violations(rows: Sequence[Sequence[float]], n_parents: int,
                       n_children: int | None = None, name: str = "cpt") -> list[str]:
    """All structural problems of a CPT row matrix, not just the first."""
    problems = []
    if len(rows) != n_parents:
        problems.append(f"{name}: expected {n_parents} rows, got {len(rows)}")
    width = n_children if n_children is not None else (len(rows[0]) if rows else 0)
    for i, row in enumerate(rows):
        if len(row) != width:
            problems.append(f"{name} row {i}: expected {width} entries, got {len(row)}")
            continue
        bad = [x for x in row if not 0.0 <= x <= 1.0]
        if bad:
            problems.append(f"{name} row {i}: entries outside [0, 1]: {bad}")
            continue
        total = sum(row)
        if abs(total - 1.0) > ROW_SUM_TOLERANCE:
            problems.append(f"{name} row {i}: sums to {total:.6g}, not 1")
    return problems


@dataclass(frozen=True)
class Cpt:
    """Conditional probability table: rows[i][j] = P(child=j | parent=i).

    Every row is a distribution over the child states and must sum to 1.
    """

    parent_states: tuple[str, ...]
    child_states: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        problems = cpt_row_violations(self.rows, len(self.parent_states),
                                      len(self.child_states))
        if problems:
            raise ValueError("; ".join(problems))

    @classmethod
    def build(cls, rows: Sequence[Sequence[float]],
              parent_states: Sequence[str] = TRAFFIC_CLASSES,
              child_states: Sequence[str] | None = None) -> "Cpt":
        if child_states is None:
            child_states = tuple(f"bin{j}" for j in range(len(rows[0])))
        return cls(tuple(parent_states), tuple(child_states),
                   tuple(tuple(float(x) for x in row) for row in rows))

    def column(self, j: int) -> tuple[float, ...]:
        return tuple(row[j] for row in self.rows)


def likelihood_to_parent(cpt: Cpt, child_likelihood: Sequence[float]) -> tuple[float, ...]:
    """Push a child's likelihood up through its CPT (matrix-vector product)."""
    if len(child_likelihood) != len(cpt.child_states):
        raise ValueError(
            f"likelihood has {len(child_likelihood)} entries for "
            f"{len(cpt.child_states)} child states")
    return tuple(
        sum(p * lam for p, lam in zip(row, child_likelihood)) for row in cpt.rows)


def fuse_likelihoods(
    vectors: Sequence[Sequence[float]],
) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Elementwise product of the children's upward likelihoods.

    Returns the raw product and its unit-sum normalization. An all-zero
    product means the evidence vetoes every class and is rejected.
    """
    if not vectors:
        raise ValueError("fusion needs at least one likelihood vector")
    length = len(vectors[0])
    if any(len(v) != length for v in vectors):
        raise ValueError("likelihood vectors must have equal lengths")
    fused = [1.0] * length
    for vector in vectors:
        fused = [f * v for f, v in zip(fused, vector)]
    total = sum(fused)
    if total <= 0.0:
        raise ContradictoryEvidence("fused likelihood is all-zero")
    return tuple(fused), tuple(f / total for f in fused)


def propagate_prior(prior: Sequence[float], cpt: Cpt) -> tuple[float, ...]:
    """Push a prior down through a CPT (row vector times matrix), normalized."""
    if len(prior) != len(cpt.parent_states):
        raise ValueError(
            f"prior has {len(prior)} entries for {len(cpt.parent_states)} parent states")
    child = [
        sum(prior[i] * cpt.rows[i][j] for i in range(len(prior)))
        for j in range(len(cpt.child_states))
    ]
    total = sum(child)
    if total <= 0.0:
        raise ValueError("prior propagated to an all-zero distribution")
    return tuple(c / total for c in child)


def belief(prior: Sequence[float], likelihood: Sequence[float]) -> tuple[float, ...]:
    """Normalized posterior over states: elementwise prior times likelihood."""
    if len(prior) != len(likelihood):
        raise ValueError("prior and likelihood lengths differ")
    product = [p * lam for p, lam in zip(prior, likelihood)]
    total = sum(product)
    if total <= 0.0:
        raise ContradictoryEvidence("belief product is all-zero")
    return tuple(x / total for x in product)


def posterior(prior: float, likelihood_h: float, evidence_prob: float) -> float:
    """Scalar Bayes rule: P(H|e) = P(e|H) * P(H) / P(e)."""
    if evidence_prob <= 0.0:
        raise ValueError("evidence probability must be positive")
    return likelihood_h * prior / evidence_prob


def uniform_prior(n: int) -> tuple[float, ...]:
    return tuple(1.0 / n for _ in range(n))
