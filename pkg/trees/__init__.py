"""
Trees of spaces and hyperbolic ladders
"""
from .tree_spaces import (
    ConeComponent,
    ConeLocus,
    ConedTree,
    EdgeSpace,
    TotalSpace,
    TreeBuilder,
    TreeGeometry,
    TreeOfSpaces,
    ValidationReport,
    VertexSpace,
)
from .ladder import Ladder, LadderBuilder, Retraction, VerticalRay

__all__ = [
    'TreeOfSpaces', 'VertexSpace', 'EdgeSpace', 'TotalSpace', 'ConedTree', 'ConeLocus', 'ConeComponent',
    'TreeBuilder', 'TreeGeometry', 'ValidationReport',
    'Ladder', 'LadderBuilder', 'Retraction', 'VerticalRay',
]
