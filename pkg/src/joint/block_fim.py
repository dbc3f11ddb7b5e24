"""
Block FIM of the joint source/anchor estimation problem.

Parameter layout: unknown-position sources first, then uncertain anchors,
two coordinates each.

    F = [[Xi,      Gamma],
         [Gamma^T, Omega]]

Xi    block-diagonal, t_j Psi^j with Psi^j summed over all anchors
Omega block-diagonal, a_k K_k^{-1} + sum_j t_j lambda_k^j R_k^j over all sources
Gamma blocks -t_j lambda_k^j R_k^j for unknown source j and uncertain anchor k
"""

from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from ..geometry.ellipse import InfoMatrix2
from ..propagation.rss_model import degenerate_geometry, lambda_coeff, source_geometry
from ..utils.errors import EmptyParameterVectorError, UnknownNodeIdError
from ..utils.logger import get_logger
from .network import Scenario

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class BlockFim:
    """Assembled joint FIM with named block views."""
    matrix: np.ndarray
    source_ids: List[str]
    anchor_ids: List[str]
    anchor_prior: Dict[str, np.ndarray] = field(repr=False)
    anchor_gain: Dict[str, np.ndarray] = field(repr=False)

    @property
    def source_dim(self) -> int:
        return 2 * len(self.source_ids)

    @property
    def xi(self) -> np.ndarray:
        d = self.source_dim
        return self.matrix[:d, :d]

    @property
    def gamma(self) -> np.ndarray:
        d = self.source_dim
        return self.matrix[:d, d:]

    @property
    def omega(self) -> np.ndarray:
        d = self.source_dim
        return self.matrix[d:, d:]

    @property
    def offsets(self) -> Dict[str, int]:
        """Node id -> row offset of its 2x2 block."""
        ids = self.source_ids + self.anchor_ids
        return {node_id: 2 * i for i, node_id in enumerate(ids)}

    def offset(self, node_id: str) -> int:
        try:
            return self.offsets[node_id]
        except KeyError:
            raise UnknownNodeIdError(
                f"'{node_id}' is not an unknown-position node of this scenario"
            ) from None

    def block(self, row_id: str, col_id: str = None) -> np.ndarray:
        """2x2 block for a pair of nodes (diagonal block when col_id is None)."""
        r = self.offset(row_id)
        c = self.offset(col_id if col_id is not None else row_id)
        return self.matrix[r:r + 2, c:c + 2]

    def node_fim(self, node_id: str) -> InfoMatrix2:
        """Diagonal block as an InfoMatrix2 (the information with every other node known)."""
        return InfoMatrix2.from_array(self.block(node_id))


def assemble_block_fim(scenario: Scenario) -> BlockFim:
    """
    Build the joint FIM of a scenario.

    Args:
        scenario: Valid scenario

    Returns:
        BlockFim of size (2s' + 2u) where s' counts unknown-position sources

    Raises:
        BelowReferenceDistanceError: If a source-anchor distance is below d0
        EmptyParameterVectorError: If nothing is unknown
    """
    unknown = scenario.unknown_sources
    uncertain = scenario.uncertain_anchors
    if not unknown and not uncertain:
        raise EmptyParameterVectorError(
            "Scenario has no unknown-position source and no uncertain anchor"
        )

    source_ids = [s.id for s in unknown]
    anchor_ids = [a.id for a in uncertain]
    s_dim, size = 2 * len(unknown), 2 * (len(unknown) + len(uncertain))
    matrix = np.zeros((size, size))

    anchor_index = {a.id: i for i, a in enumerate(scenario.anchors)}
    anchor_gain = {a.id: np.zeros((2, 2)) for a in uncertain}
    anchor_prior = {a.id: a.prior_count * np.linalg.inv(a.prior_cov) for a in uncertain}

    row = 0
    for src in scenario.sources:
        geometry = source_geometry(scenario.anchors, src.position, scenario.model, src.id)
        lambdas = lambda_coeff(scenario.model, geometry.distances)
        q = geometry.unit_vectors
        # t_j lambda_k^j R_k^j for every anchor
        terms = src.sample_count * lambdas[:, None, None] * (q[:, :, None] * q[:, None, :])

        if not src.known_position:
            matrix[row:row + 2, row:row + 2] = terms.sum(axis=0)
            if degenerate_geometry(geometry.bearings):
                logger.warning(f"Degenerate geometry for source '{src.id}': anchors are collinear")

        for col, anchor in enumerate(uncertain):
            term = terms[anchor_index[anchor.id]]
            anchor_gain[anchor.id] += term
            if not src.known_position:
                c = s_dim + 2 * col
                matrix[row:row + 2, c:c + 2] = -term
                matrix[c:c + 2, row:row + 2] = -term

        if not src.known_position:
            row += 2

    for col, anchor in enumerate(uncertain):
        c = s_dim + 2 * col
        matrix[c:c + 2, c:c + 2] = anchor_prior[anchor.id] + anchor_gain[anchor.id]

    logger.info(
        f"Assembled block FIM {size}x{size} for {len(unknown)} unknown sources "
        f"and {len(uncertain)} uncertain anchors"
    )
    return BlockFim(
        matrix=matrix,
        source_ids=source_ids,
        anchor_ids=anchor_ids,
        anchor_prior=anchor_prior,
        anchor_gain=anchor_gain,
    )
