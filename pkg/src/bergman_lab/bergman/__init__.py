from .quadrature import QuadratureRule, build_quadrature
from .basis import OrthoBasis, KernelValue, gram, projection, berezin, bergman_metric, bergman_metric_grid
from . import oracles

__all__ = [
    "QuadratureRule", "build_quadrature", "OrthoBasis", "KernelValue", "gram",
    "projection", "berezin", "bergman_metric", "bergman_metric_grid", "oracles",
]
