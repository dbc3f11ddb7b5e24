"""Joint source/anchor estimation: network model, block FIM and marginal FIMs."""

from .block_fim import BlockFim, assemble_block_fim
from .marginals import (
    AnchorFimDecomposition,
    SourceFimDecomposition,
    anchor_marginal_fim,
    node_marginal_fim,
    source_marginal_fim,
)
from .network import Scenario, Source, UncertainAnchor
from .specializations import (
    all_uncertain_fim_closed_form,
    all_uncertain_source_fim,
    anchor_information_update,
    isotropic_uncertainty_loss,
    multi_source_loss_coeff,
    uncertain_subset_source_fim,
)

__all__ = [
    'AnchorFimDecomposition',
    'BlockFim',
    'Scenario',
    'Source',
    'SourceFimDecomposition',
    'UncertainAnchor',
    'all_uncertain_fim_closed_form',
    'all_uncertain_source_fim',
    'anchor_information_update',
    'anchor_marginal_fim',
    'assemble_block_fim',
    'isotropic_uncertainty_loss',
    'multi_source_loss_coeff',
    'node_marginal_fim',
    'source_marginal_fim',
    'uncertain_subset_source_fim',
]
