"""
Geometry package: metric graphs, electrification and partial electrocution
"""
from .errors import DomainError, GeometryError, InvariantViolation, ParseError, PreconditionError
from .metric_graph import DeltaEstimate, GraphBuilder, GraphGeometry, Measurement, MetricGraph, PathWitness
from .params import Constant, GeometryParams
from .electric import (
    ConedSpace,
    Electrifier,
    GluedSpace,
    HoroFamily,
    Horoball,
    PenetrationProfile,
    PeripheralView,
)
from .partial_electro import CylinderTarget, PartialElectroSpace, PartialElectrocution

__all__ = [
    'GeometryError', 'DomainError', 'InvariantViolation', 'PreconditionError', 'ParseError',
    'MetricGraph', 'GraphBuilder', 'GraphGeometry', 'PathWitness', 'DeltaEstimate', 'Measurement',
    'Constant', 'GeometryParams',
    'HoroFamily', 'ConedSpace', 'GluedSpace', 'Horoball', 'PenetrationProfile', 'PeripheralView', 'Electrifier',
    'CylinderTarget', 'PartialElectroSpace', 'PartialElectrocution',
]
