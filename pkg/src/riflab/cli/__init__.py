"""Command-line front end, polynomial parser and example registry."""

from .parser import parse_poly
from .registry import available, example, registry

__all__ = ["parse_poly", "registry", "example", "available"]
