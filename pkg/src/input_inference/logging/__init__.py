"""Stderr logger shared by the library and the command line."""

from input_inference.logging.logger import setup_logger

__all__ = ["setup_logger"]
