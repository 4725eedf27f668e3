"""
nomsos - nominal residual transition system specifications.
"""

__version__ = "1.0.0"
