"""RSS propagation model, basic source FIM and nuisance-parameter FIMs."""

from .nuisance import (
    Fim3,
    LossEllipse,
    Nuisance,
    equivalent_fim_unknown_gamma,
    equivalent_fim_unknown_power,
    fim_unknown_gamma,
    fim_unknown_power,
    fim_unknown_power_gamma,
    joint_power_gamma_singularity,
)
from .rss_model import (
    Anchor,
    PropagationModel,
    SourceGeometry,
    bearing_matrix,
    circle_scenario_ie,
    degenerate_geometry,
    equal_spacing_cosine_sum,
    lambda_coeff,
    mean_rss,
    source_fim,
    source_geometry,
    source_ie_closed_form,
)

__all__ = [
    'Anchor',
    'Fim3',
    'LossEllipse',
    'Nuisance',
    'PropagationModel',
    'SourceGeometry',
    'bearing_matrix',
    'circle_scenario_ie',
    'degenerate_geometry',
    'equal_spacing_cosine_sum',
    'equivalent_fim_unknown_gamma',
    'equivalent_fim_unknown_power',
    'fim_unknown_gamma',
    'fim_unknown_power',
    'fim_unknown_power_gamma',
    'joint_power_gamma_singularity',
    'lambda_coeff',
    'mean_rss',
    'source_fim',
    'source_geometry',
    'source_ie_closed_form',
]
