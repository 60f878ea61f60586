"""Orbits, genericity certificates and setwise stabilizers of finite unitary groups."""

from ._kernels import BACKEND
from .errors import (
    AmbiguousIdentification,
    DimensionMismatch,
    InconsistentForm,
    InputError,
    NonSquareMatrix,
    NonUnitaryGenerator,
    NotIsometric,
    NotSpanning,
    OrderExceeded,
    SchemaError,
    TooManyPoints,
    UnistabError,
    ZeroVector,
)
from .genericity import GenericityCertificate, SampleReport, Verdict, certify, fingerprint, sample
from .group import FiniteMatrixGroup, PointConfiguration, close, member_index, orbit
from .numerics import ToleranceConfig, inner, is_unitary, polarize, spans
from .stabilizer import (
    Comparison,
    StabilizerResult,
    brute_stabilizer,
    compare,
    gram,
    gram_automorphisms,
    lift,
    setwise_stabilizer,
)

__version__ = "0.1.0"
