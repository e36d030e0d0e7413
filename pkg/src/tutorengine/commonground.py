"""Dialogue common ground as an orthonormal basis over turn vectors.

Each dialogue turn is projected into a shared term-vector space and
folded into the basis by Gram-Schmidt. Coverage of a candidate vector by
the span of the basis tells us how much of it has already been said; a
concept whose statement is mostly inside the span is in the common
ground of the conversation.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .config import DEFAULT_CONFIG, EngineConfig
from .curriculum import Concept, QuestionTemplate
from .errors import EmptyCandidates
from .student import StudentModel
from .textmatch import term_vector


class DialogueBasis:
    """Growing orthonormal basis over the vocabulary seen so far.

    Vectors are re-embedded by zero-extension whenever new terms appear,
    which leaves existing dot products unchanged. Session-local mutable
    state; callers serialize access per session.
    """

    def __init__(self, residual_epsilon: float = DEFAULT_CONFIG.basis_residual_epsilon):
        self.residual_epsilon = residual_epsilon
        self.vocabulary: dict[str, int] = {}
        self.vectors: list[np.ndarray] = []
        self.source_turn_count = 0

    def __len__(self) -> int:
        return len(self.vectors)

    def _embed(self, vec: Mapping[str, float], grow: bool) -> np.ndarray:
        if grow:
            for term in vec:
                if term not in self.vocabulary:
                    self.vocabulary[term] = len(self.vocabulary)
            dim = len(self.vocabulary)
            self.vectors = [self._pad(b, dim) for b in self.vectors]
        dim = max(len(self.vocabulary), 1)
        out = np.zeros(dim)
        for term, weight in vec.items():
            idx = self.vocabulary.get(term)
            if idx is not None:
                out[idx] = weight
        return out

    @staticmethod
    def _pad(v: np.ndarray, dim: int) -> np.ndarray:
        if len(v) == dim:
            return v
        out = np.zeros(dim)
        out[: len(v)] = v
        return out

    def add_turn(self, turn_text: str) -> None:
        """Fold one turn into the basis.

        The residual after subtracting projections onto the existing basis
        is appended (normalized) unless its norm falls under the epsilon,
        in which case the turn was linearly dependent and the basis is
        unchanged. The turn counter increments either way.
        """
        self.source_turn_count += 1
        vec = term_vector(turn_text)
        if not vec:
            return
        residual = self._embed(vec, grow=True)
        # two orthogonalization passes keep the Gram matrix at identity
        # within 1e-9 under hundreds of insertions
        for _ in range(2):
            for b in self.vectors:
                residual -= (residual @ b) * b
        norm = float(np.linalg.norm(residual))
        if norm > self.residual_epsilon:
            self.vectors.append(residual / norm)

    def projection_coverage(self, vec: Mapping[str, float]) -> float:
        """|projection of vec onto span(basis)| / |vec|; 0.0 for the zero vector."""
        if not vec or not self.vectors:
            return 0.0
        v = self._embed(vec, grow=False)
        full_norm = np.sqrt(sum(w * w for w in vec.values()))
        if full_norm == 0.0:
            return 0.0
        proj_sq = sum(float(v @ b) ** 2 for b in self.vectors)
        return float(np.sqrt(proj_sq) / full_norm)

    def coverage_of_text(self, text: str) -> float:
        return self.projection_coverage(term_vector(text))

    def gram_matrix(self) -> np.ndarray:
        if not self.vectors:
            return np.zeros((0, 0))
        basis = np.stack(self.vectors)
        return basis @ basis.T

    def reconstruct(self, vec: Mapping[str, float]) -> np.ndarray:
        """Projection of vec onto the span, in embedded coordinates."""
        v = self._embed(vec, grow=False)
        out = np.zeros_like(v)
        for b in self.vectors:
            out += (v @ b) * b
        return out


def in_common_ground(
    basis: DialogueBasis,
    concept: Concept,
    config: EngineConfig = DEFAULT_CONFIG,
) -> bool:
    return basis.coverage_of_text(concept.statement) >= config.common_ground_threshold


def select_question(
    candidates: Sequence[QuestionTemplate],
    model: StudentModel,
    basis: DialogueBasis,
) -> QuestionTemplate:
    """Pick the question whose perfect answer would raise coverage most.

    A perfect answer drives the concept's coverage to 1.0, so the
    hypothetical gain is 1.0 minus current coverage. Ties prefer the
    candidate whose expected answer lies most within the common ground,
    then curriculum order; the result is invariant under permutation of
    the candidate list.
    """
    if not candidates:
        raise EmptyCandidates("no candidate questions")

    def sort_key(q: QuestionTemplate):
        gain = 1.0 - model.coverage(q.concept_id)
        ground = basis.coverage_of_text(q.expected_answer)
        return (-gain, -ground, q.order, q.id)

    return min(candidates, key=sort_key)
