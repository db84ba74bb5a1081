"""mathspec: an interactive engine for building formal specifications of
math word problems (Given / Where / Find / Relate plus references)."""

from . import refine as _refine  # installs the builtin predicate evaluators

__version__ = "0.1.0"

del _refine
