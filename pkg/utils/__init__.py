"""
Utilities package
"""
from .file_handler import FileHandler
from .parallel import parallel_map

__all__ = ['FileHandler', 'parallel_map']
