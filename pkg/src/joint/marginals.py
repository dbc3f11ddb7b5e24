"""
Per-node FIMs of the joint problem by Schur-complement elimination.

Source j:
    F(r_TX(j)) = t_j Psi^j - dPsi_1^j - dPsi_2^j
    dPsi_1^j   loss from jointly estimating the uncertain anchors
    dPsi_2^j   loss from jointly estimating the other unknown sources

Uncertain anchor k:
    F(r_k) = a_k K_k^{-1} + dK_{k,1}^{-1} - dK_{k,2}^{-1} - dK_{k,3}^{-1}
    dK_{k,1}^{-1}  gain from every source's RSS observations
    dK_{k,2}^{-1}  loss from the unknown source positions
    dK_{k,3}^{-1}  loss from the other uncertain anchors
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy import linalg

from ..geometry.ellipse import InfoMatrix2
from ..utils.errors import SingularBlockError, UnknownNodeIdError
from ..utils.logger import get_logger
from .block_fim import BlockFim, assemble_block_fim
from .network import Scenario

logger = get_logger(__name__)

# Smallest eigenvalue over largest below which a block counts as singular
SINGULAR_BLOCK_TOL = 1e-12


@dataclass(frozen=True)
class SourceFimDecomposition:
    pure: InfoMatrix2
    loss_anchors: InfoMatrix2
    loss_other_sources: InfoMatrix2
    net: InfoMatrix2

    def to_dict(self) -> dict:
        """Convert to dictionary format."""
        return {
            'pure': self.pure.to_dict(),
            'loss_anchors': self.loss_anchors.to_dict(),
            'loss_other_sources': self.loss_other_sources.to_dict(),
            'net': self.net.to_dict(),
        }


@dataclass(frozen=True)
class AnchorFimDecomposition:
    prior: InfoMatrix2
    gain_main: InfoMatrix2
    loss_unknown_sources: InfoMatrix2
    loss_other_anchors: InfoMatrix2
    net: InfoMatrix2

    def to_dict(self) -> dict:
        """Convert to dictionary format."""
        return {
            'prior': self.prior.to_dict(),
            'gain_main': self.gain_main.to_dict(),
            'loss_unknown_sources': self.loss_unknown_sources.to_dict(),
            'loss_other_anchors': self.loss_other_anchors.to_dict(),
            'net': self.net.to_dict(),
        }


def _check_invertible(matrix: np.ndarray, what: str) -> None:
    eigenvalues = np.linalg.eigvalsh(matrix)
    if eigenvalues[-1] <= 0 or eigenvalues[0] <= SINGULAR_BLOCK_TOL * eigenvalues[-1]:
        raise SingularBlockError(
            f"{what} is singular (eigenvalues {eigenvalues[0]:.3e} .. {eigenvalues[-1]:.3e}); "
            f"the joint problem is unidentifiable"
        )


def solve_pd(matrix: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    """
    Solve matrix @ X = rhs for a symmetric positive definite matrix.

    Raises:
        SingularBlockError: If the matrix is singular or not positive definite
    """
    _check_invertible(matrix, what)
    try:
        factor = linalg.cho_factor(matrix)
    except linalg.LinAlgError as e:
        raise SingularBlockError(f"{what} is not positive definite: {e}") from e
    return linalg.cho_solve(factor, rhs)


def _pair_indices(block: BlockFim, node_ids: List[str], base: int = 0) -> np.ndarray:
    return np.concatenate([
        np.arange(block.offset(nid) - base, block.offset(nid) - base + 2) for nid in node_ids
    ]) if node_ids else np.array([], dtype=int)


def _sym(matrix: np.ndarray) -> InfoMatrix2:
    return InfoMatrix2.from_array(0.5 * (matrix + matrix.T))


def source_marginal_fim(
    scenario: Scenario,
    source_id: str,
    block: Optional[BlockFim] = None
) -> SourceFimDecomposition:
    """
    Marginal FIM of one unknown-position source with its gain/loss terms.

    Args:
        scenario: Scenario
        source_id: Id of a source with unknown position
        block: Pre-assembled BlockFim of the scenario (assembled if omitted)

    Returns:
        SourceFimDecomposition

    Raises:
        UnknownNodeIdError: If the id is not an unknown-position source
        SingularBlockError: If Omega or the reduced source system is singular
    """
    block = block if block is not None else assemble_block_fim(scenario)
    if source_id not in block.source_ids:
        raise UnknownNodeIdError(f"'{source_id}' is not an unknown-position source")

    j = _pair_indices(block, [source_id])
    pure = block.xi[np.ix_(j, j)]
    zero = np.zeros((2, 2))

    if block.anchor_ids:
        gamma = block.gamma
        # Xi - Gamma Omega^{-1} Gamma^T: sources with anchors eliminated
        reduced = block.xi - gamma @ solve_pd(block.omega, gamma.T, "Omega (uncertain anchor block)")
        loss_anchors = pure - reduced[np.ix_(j, j)]
    else:
        reduced = block.xi
        loss_anchors = zero

    others = [sid for sid in block.source_ids if sid != source_id]
    if others:
        rest = _pair_indices(block, others)
        cross = reduced[np.ix_(j, rest)]
        loss_sources = cross @ solve_pd(
            reduced[np.ix_(rest, rest)], cross.T, "reduced FIM of the other sources"
        )
    else:
        loss_sources = zero

    net = pure - loss_anchors - loss_sources
    logger.debug(f"Source '{source_id}' marginal FIM computed ({len(others)} other unknown sources)")
    return SourceFimDecomposition(
        pure=_sym(pure),
        loss_anchors=_sym(loss_anchors),
        loss_other_sources=_sym(loss_sources),
        net=_sym(net),
    )


def anchor_marginal_fim(
    scenario: Scenario,
    anchor_id: str,
    block: Optional[BlockFim] = None
) -> AnchorFimDecomposition:
    """
    Marginal FIM of one uncertain anchor with its gain/loss terms.

    Args:
        scenario: Scenario
        anchor_id: Id of an uncertain anchor
        block: Pre-assembled BlockFim of the scenario (assembled if omitted)

    Returns:
        AnchorFimDecomposition

    Raises:
        UnknownNodeIdError: If the id is not an uncertain anchor
        SingularBlockError: If a source block or the reduced anchor system is singular
    """
    block = block if block is not None else assemble_block_fim(scenario)
    if anchor_id not in block.anchor_ids:
        raise UnknownNodeIdError(f"'{anchor_id}' is not an uncertain anchor")

    base = block.source_dim
    k = _pair_indices(block, [anchor_id], base)
    prior = block.anchor_prior[anchor_id]
    gain = block.anchor_gain[anchor_id]
    omega = block.omega

    if block.source_ids:
        gamma = block.gamma
        # Gamma^T Xi^{-1} Gamma; Xi is block-diagonal so each source block is inverted alone
        correction = np.zeros_like(omega)
        for sid in block.source_ids:
            rows = _pair_indices(block, [sid])
            g = gamma[rows, :]
            correction += g.T @ solve_pd(block.xi[np.ix_(rows, rows)], g, f"source '{sid}' block")
        reduced = omega - correction
        loss_sources = correction[np.ix_(k, k)]
    else:
        reduced = omega
        loss_sources = np.zeros((2, 2))

    others = [aid for aid in block.anchor_ids if aid != anchor_id]
    if others:
        rest = _pair_indices(block, others, base)
        cross = reduced[np.ix_(k, rest)]
        loss_anchors = cross @ solve_pd(
            reduced[np.ix_(rest, rest)], cross.T, "reduced FIM of the other uncertain anchors"
        )
    else:
        loss_anchors = np.zeros((2, 2))

    net = prior + gain - loss_sources - loss_anchors
    logger.debug(f"Anchor '{anchor_id}' marginal FIM computed ({len(others)} other uncertain anchors)")
    return AnchorFimDecomposition(
        prior=_sym(prior),
        gain_main=_sym(gain),
        loss_unknown_sources=_sym(loss_sources),
        loss_other_anchors=_sym(loss_anchors),
        net=_sym(net),
    )


def node_marginal_fim(scenario: Scenario, node_id: str, block: Optional[BlockFim] = None) -> InfoMatrix2:
    """Net marginal FIM of any unknown-position node."""
    block = block if block is not None else assemble_block_fim(scenario)
    if node_id in block.source_ids:
        return source_marginal_fim(scenario, node_id, block).net
    return anchor_marginal_fim(scenario, node_id, block).net
