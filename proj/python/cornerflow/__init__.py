"""Corner normal-form numerics: admissible blowup metrics, the regularized
normal geodesic flow, the compactified exponential map and slice metrics."""

try:
    from ._cornerflow import *  # noqa: F401,F403  (installed package layout)
except ImportError:
    from _cornerflow import *  # noqa: F401,F403  (in-tree build on sys.path)
