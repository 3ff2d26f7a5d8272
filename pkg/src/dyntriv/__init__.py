"""Manifold-constrained optimization through static and dynamic trivializations."""

from . import densela, engine, manifolds, matexp, optim, triv
from .engine import EngineConfig, Objective, init_state, run
from .errors import (
    ConfigError, DomainError, DyntrivError, NumericalAbort, ShapeError,
    SingularMatrixError, StructureError, TangencyError,
)
from .manifolds import (
    GeneralLinearPlus, Hyperbolic, Point, RealTorus, SpecialLinear, SpecialOrthogonal,
    Sphere, Stiefel, SymPosDef, make_point, membership, random_point,
)
from .matexp import dexpm, expm, expm_grad
from .optim import make_optimizer
from .triv import Trivialization, pullback_grad, value

__version__ = "0.1.0"
