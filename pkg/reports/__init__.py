"""
Experiment orchestration and report files
"""
from .experiment import ExperimentConfig, ExperimentRunner, ReportDocument, parse_radii
from .report_store import ReportStore

__all__ = ['ExperimentConfig', 'ExperimentRunner', 'ReportDocument', 'ReportStore', 'parse_radii']
