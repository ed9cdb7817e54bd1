"""Compile typed planning models to Boolean STRIPS and PDDL."""

from .errors import TypalError
from .pipeline import Compiled, PipelineConfig, compile_file, compile_text, solve

__all__ = ["Compiled", "PipelineConfig", "TypalError", "compile_file", "compile_text", "solve"]
__version__ = "0.1.0"
