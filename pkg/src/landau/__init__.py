"""Certified computable lower bounds for Landau's constant.

Layers, bottom up: exact dyadic arithmetic (:mod:`landau.dyadic`), symbol
streams encoding power series (:mod:`landau.stream`), bound schedules and
guaranteed-error evaluation (:mod:`landau.schedule`, :mod:`landau.series`),
covering grids (:mod:`landau.grid`), the per-function certificate
(:mod:`landau.certify`) and the global search (:mod:`landau.search`).
"""

from .certify import Budget, LambdaCertificate, find_circle, lambda_lower_bound, lemma7_params
from .dyadic import ComplexDyadic, Dyadic, Rounding, dy_approx
from .errors import LandauError
from .grid import CoveringGrid, covered_contains, grid_from_image, grid_l_value
from .schedule import BoundSchedule, GeometricSchedule, GenericBounds, InjectedBounds, make_schedule
from .search import SearchReport, enumerate_words, landau_estimate
from .series import EvalRequest, eval_series
from .stream import PiStream, encode_coefficients

__version__ = "0.1.0"
