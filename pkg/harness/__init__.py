"""
Instance generators, the Cannon-Thurston harness and invariant suites
"""
from .free_group import FreeGroupBall
from .generators import InstanceGenerator
from .ct_harness import AdmissibleSet, CTHarness, CTProfile, CTRow
from .suites import SUITES, InvariantSuites, SuiteContext, SuiteResult, family_sweep

__all__ = [
    'FreeGroupBall', 'InstanceGenerator',
    'AdmissibleSet', 'CTHarness', 'CTProfile', 'CTRow',
    'SUITES', 'InvariantSuites', 'SuiteContext', 'SuiteResult', 'family_sweep',
]
